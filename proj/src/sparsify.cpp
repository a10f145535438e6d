#include "normforge/sparsify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "normforge/log.hpp"

namespace normforge {

void SparsifyConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "SparsifyConfig: epsilon must lie in (0, 1)");
  }
  if (!(C_M > 0.0)) fail(ErrorKind::kInvalidArgument, "SparsifyConfig: C_M must be > 0");
  if (!(p >= 1.0)) fail(ErrorKind::kInvalidArgument, "SparsifyConfig: p must be >= 1");
  if (max_retries < 0) fail(ErrorKind::kInvalidArgument, "SparsifyConfig: max_retries < 0");
}

Index choose_M(Index n, double epsilon, double p, double C_M) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(C_M > 0.0) || !(p >= 1.0) || n < 1) {
    fail(ErrorKind::kInvalidArgument, "choose_M: need n >= 1, eps in (0,1), C_M > 0, p >= 1");
  }
  const double nd = static_cast<double>(n);
  const double log_n = std::log(std::max(nd, 3.0));
  const double psi = std::sqrt(log_n);
  const double log_ne = std::log(nd / epsilon);
  double m;
  if (p <= 2.0) {
    m = C_M * nd * std::pow(log_ne, p) * std::pow(psi, p) * log_n * log_n /
        (epsilon * epsilon);
  } else {
    const double chain = log_ne * log_n * psi;
    m = C_M * std::pow((nd + p) / 2.0, p / 2.0) * p * p * chain * chain /
        (epsilon * epsilon);
  }
  if (!std::isfinite(m) || m > 9.0e15) {
    fail(ErrorKind::kInvalidArgument, "choose_M: draw count overflows");
  }
  return std::max<Index>(1, static_cast<Index>(std::ceil(m)));
}

SparsifierResult sample_support(const ProbabilityVector& rho, Index M, Rng& rng) {
  const Index m = rho.size();
  if (m == 0 || M < 1) fail(ErrorKind::kInvalidArgument, "sample_support: empty rho or M < 1");
  if (!rho.rho.allFinite() || rho.rho.minCoeff() <= 0.0) {
    fail(ErrorKind::kInvalidArgument, "sample_support: probabilities must be positive");
  }
  std::vector<double> prefix(static_cast<std::size_t>(m));
  std::partial_sum(rho.rho.data(), rho.rho.data() + m, prefix.begin());
  const double total = prefix.back();
  std::uniform_real_distribution<double> uni(0.0, total);

  SparsifierResult out;
  out.M = M;
  out.counts = Vector::Zero(m);
  for (Index j = 0; j < M; ++j) {
    const double u = uni(rng);
    auto it = std::upper_bound(prefix.begin(), prefix.end(), u);
    if (it == prefix.end()) --it;
    out.counts(static_cast<Index>(it - prefix.begin())) += 1.0;
  }
  out.weights = Vector::Zero(m);
  for (Index i = 0; i < m; ++i) {
    if (out.counts(i) > 0.0) {
      out.weights(i) = out.counts(i) / (static_cast<double>(M) * rho.rho(i));
      out.support.push_back(i);
    }
  }
  out.rho = rho.rho;
  return out;
}

SparsifierResult sparsify_once(const SumNorm& N, const SampleBatch& batch,
                               const SparsifyConfig& cfg) {
  cfg.validate();
  const TauVector tau = estimate_tau(N, batch, N.p());
  const ProbabilityVector rho = to_probabilities(tau);
  const Index M = choose_M(N.dim(), cfg.epsilon, N.p(), cfg.C_M);
  Rng rng = make_rng(derive_seed(cfg.seed, "support"));
  SparsifierResult out = sample_support(rho, M, rng);
  out.tau = tau.tau;
  out.seed = cfg.seed;
  return out;
}

SparsifierResult sparsify_with_probabilities(const ProbabilityVector& rho, Index n,
                                             const SparsifyConfig& cfg) {
  cfg.validate();
  const Index M = choose_M(n, cfg.epsilon, cfg.p, cfg.C_M);
  Rng rng = make_rng(derive_seed(cfg.seed, "support"));
  SparsifierResult out = sample_support(rho, M, rng);
  out.seed = cfg.seed;
  return out;
}

double equivalence_ratio(const SumNorm& A, const SumNorm& B, const Matrix& probes) {
  double worst = 1.0;
  for (Index j = 0; j < probes.cols(); ++j) {
    const Vector x = probes.col(j);
    const double a = A.eval(x);
    const double b = B.eval(x);
    if (a == 0.0 && b == 0.0) continue;
    if (a == 0.0 || b == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max({worst, a / b, b / a});
  }
  return worst;
}

double smoothness_proxy(const SumNorm& N, double p, Index trials, std::uint64_t seed) {
  Rng rng = make_rng(derive_seed(seed, "smoothness"));
  double worst = 0.0;
  for (Index i = 0; i < trials; ++i) {
    const Vector x = gaussian_vector(N.dim(), rng);
    const Vector y = gaussian_vector(N.dim(), rng);
    const double ny = std::pow(N.eval(y), p);
    if (!(ny > 0.0)) continue;
    const double lhs = 0.5 * (std::pow(N.eval(x + y), p) + std::pow(N.eval(x - y), p)) -
                       std::pow(N.eval(x), p);
    if (lhs > 0.0) worst = std::max(worst, std::pow(lhs / ny, 1.0 / p));
  }
  return worst;
}

namespace {

using Clock = std::chrono::steady_clock;

Matrix probe_matrix(Index n, Index gaussian, const SampleBatch* batch, std::uint64_t seed) {
  const Index from_batch = batch ? std::min<Index>(batch->count(), 256) : 0;
  Matrix probes(n, gaussian + from_batch);
  Rng rng = make_rng(derive_seed(seed, "equivalence-probes"));
  for (Index j = 0; j < gaussian; ++j) probes.col(j) = gaussian_vector(n, rng);
  for (Index j = 0; j < from_batch; ++j) probes.col(gaussian + j) = batch->points.col(j);
  return probes;
}

struct StageOutcome {
  SparsifierResult result;
  StageRecord record;
};

}  // namespace

SparsifierResult homotopy_sparsify(const SumNorm& N, double r, double R, double epsilon,
                                   const SparsifyConfig& cfg_in) {
  SparsifyConfig cfg = cfg_in;
  cfg.epsilon = epsilon;
  cfg.p = N.p();
  cfg.validate();
  if (!(r > 0.0) || !(R >= r) || !std::isfinite(R)) {
    fail(ErrorKind::kInvalidArgument, "homotopy_sparsify: need 0 < r <= R < inf");
  }
  if (N.p() > 2.0) {
    fail(ErrorKind::kInvalidArgument, "homotopy_sparsify: p must be <= 2");
  }
  if (N.size() == 0) fail(ErrorKind::kInvalidArgument, "homotopy_sparsify: no terms");

  const Index n = N.dim();
  const Index m = N.size();
  const double phat = N.phat();
  const double inner_eps = epsilon / 3.0;
  const double final_t = inner_eps * r;
  const int halvings = std::max(0, static_cast<int>(std::ceil(std::log2(R / (epsilon * r)))));
  const Index k_tau = cfg.k_tau > 0 ? cfg.k_tau : tau_sample_count(n, m + 1, cfg.C_w);

  auto regularized = [&](double t) { return N.with_term(euclidean(t)); };

  SparsifierResult out;
  out.seed = cfg.seed;
  Vector previous;  // weights of the last accepted stage over m + 1 terms
  double previous_t = R;

  const int stages = halvings + 2;
  for (int stage = 0; stage < stages; ++stage) {
    const bool first = stage == 0;
    const bool last = stage == stages - 1;
    const double t = first ? R : (last ? final_t : R / std::ldexp(1.0, stage));
    const double stage_eps = last ? inner_eps : 0.5;
    const SumNorm target = regularized(t);

    bool accepted = false;
    for (int attempt = 0; attempt <= cfg.max_retries && !accepted; ++attempt) {
      const auto start = Clock::now();
      const std::uint64_t evals_before = term_evaluations();
      const std::uint64_t stage_seed =
          derive_seed(cfg.seed, "stage", static_cast<std::uint64_t>(stage) * 64 + attempt);
      SamplerConfig scfg = cfg.sampler;
      scfg.seed = derive_seed(stage_seed, "sampler");

      try {
        SampleBatch batch;
        if (first) {
          batch = sample_euclidean_mu(n, R, phat, k_tau, scfg.seed);
        } else {
          const SumNorm sampled = apply_weights(regularized(previous_t), previous);
          const RoundedNorm rounded(sampled, previous_t / 4.0,
                                    8.0 * std::max(R, previous_t) + previous_t);
          batch = sample_mu(rounded, phat, k_tau, scfg);
          const MomentCheck moment = mean_power_check(sampled, batch);
          if (!moment.pass) {
            fail(ErrorKind::kInvalidArgument,
                 "homotopy_sparsify: moment diagnostic failed; input may not be rounded");
          }
        }

        SparsifyConfig once = cfg;
        once.epsilon = stage_eps;
        once.seed = stage_seed;
        SparsifierResult stage_result = sparsify_once(target, batch, once);

        const SumNorm approx = apply_weights(target, stage_result.weights);
        const Matrix probes = probe_matrix(n, cfg.equivalence_probes, &batch, stage_seed);
        const double ratio = equivalence_ratio(target, approx, probes);

        StageRecord rec;
        rec.stage = stage;
        rec.t = t;
        rec.epsilon = stage_eps;
        rec.M = stage_result.M;
        rec.support = static_cast<Index>(stage_result.support.size());
        rec.equivalence_ratio = ratio;
        rec.attempts = attempt + 1;
        rec.evaluations = term_evaluations() - evals_before;
        rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();

        if (ratio <= 2.0 * (1.0 + stage_eps)) {
          accepted = true;
          out.stage_log.push_back(rec);
          previous = stage_result.weights;
          previous_t = t;
          if (last) {
            out.M = stage_result.M;
            out.weights = stage_result.weights.head(m);
            out.counts = stage_result.counts.head(m);
            out.tau = stage_result.tau.head(m);
            out.rho = stage_result.rho.head(m);
            out.equivalence_ratio = ratio;
          }
        } else {
          log::info("homotopy stage ", stage, " attempt ", attempt,
                    " rejected: equivalence ratio ", ratio);
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kChordFailure || attempt == cfg.max_retries) throw;
        log::info("homotopy stage ", stage, " attempt ", attempt, " failed: ", e.what());
      }
    }
    if (!accepted) {
      fail(ErrorKind::kRetriesExhausted,
           "homotopy_sparsify: stage " + std::to_string(stage) +
               " failed its equivalence check on every attempt");
    }
  }

  for (Index i = 0; i < m; ++i) {
    if (out.weights(i) > 0.0) out.support.push_back(i);
  }
  return out;
}

SparsifierResult sparsify_p_power(const SumNorm& N, const SparsifyConfig& cfg_in) {
  SparsifyConfig cfg = cfg_in;
  cfg.p = N.p();
  cfg.validate();
  const Index n = N.dim();
  const double p = N.p();

  if (p <= 2.0) {
    Rounding rounding;
    if (cfg.rounding) {
      rounding = *cfg.rounding;
    } else {
      const auto [lo, hi] = probe_rounding(N, 512, derive_seed(cfg.seed, "rounding"));
      if (!(lo > 1e-12 * hi)) {
        fail(ErrorKind::kInvalidArgument,
             "sparsify_p_power: N vanishes on probed directions; declare (r, R)");
      }
      rounding = Rounding{0.5 * lo, 2.0 * hi};
    }
    SparsifierResult out = homotopy_sparsify(N, rounding.r, rounding.R, cfg.epsilon, cfg);
    if (p > 1.0) out.smoothness_proxy = smoothness_proxy(N, p, 256, cfg.seed);
    return out;
  }

  const auto start = Clock::now();
  const std::uint64_t evals_before = term_evaluations();
  const Index k_tau = cfg.k_tau > 0 ? cfg.k_tau : tau_sample_count(n, N.size(), cfg.C_w);
  SparsifierResult out;
  SampleBatch batch;
  const Matrix probes = probe_matrix(n, cfg.equivalence_probes, nullptr, cfg.seed);
  double ratio;
  if (cfg.surrogate) {
    const SumNorm& S = *cfg.surrogate;
    if (S.dim() != n) fail(ErrorKind::kDimensionMismatch, "surrogate dimension != dim(N)");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Index j = 0; j < probes.cols(); ++j) {
      const double q = N.eval(probes.col(j)) / S.eval(probes.col(j));
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    ratio = hi / lo;
    const auto [slo, shi] = probe_rounding(S, 256, derive_seed(cfg.seed, "surrogate-rounding"));
    SamplerConfig scfg = cfg.sampler;
    scfg.seed = derive_seed(cfg.seed, "sampler");
    batch = sample_mu(RoundedNorm(S, 0.5 * slo, 2.0 * shi), 2.0, k_tau, scfg);
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Index j = 0; j < probes.cols(); ++j) {
      const Vector x = probes.col(j);
      const double q = N.eval(x) / x.norm();
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (ratio > cfg.surrogate_warn_ratio) {
      std::string msg = "sparsify_p_power: default Euclidean surrogate has measured "
                        "equivalence ratio " + std::to_string(ratio) +
                        "; supply a surrogate for a sharper sampling law";
      log::warn(msg);
      out.warnings.push_back(std::move(msg));
    }
    batch = sample_euclidean_mu(n, std::max(hi, 1e-300), 2.0, k_tau,
                                derive_seed(cfg.seed, "sampler"));
  }

  const TauVector tau = estimate_tau(N, batch, p);
  const ProbabilityVector rho = to_probabilities(tau);
  const Index M = choose_M(n, cfg.epsilon, p, cfg.C_M);
  Rng rng = make_rng(derive_seed(cfg.seed, "support"));
  SparsifierResult drawn = sample_support(rho, M, rng);
  out.weights = drawn.weights;
  out.counts = drawn.counts;
  out.M = drawn.M;
  out.support = drawn.support;
  out.rho = drawn.rho;
  out.tau = tau.tau;
  out.seed = cfg.seed;
  out.equivalence_ratio = ratio;

  StageRecord rec;
  rec.stage = 0;
  rec.epsilon = cfg.epsilon;
  rec.M = M;
  rec.support = static_cast<Index>(out.support.size());
  rec.equivalence_ratio = ratio;
  rec.attempts = 1;
  rec.evaluations = term_evaluations() - evals_before;
  rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  out.stage_log.push_back(rec);
  return out;
}

}  // namespace normforge
