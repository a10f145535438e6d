#include "normforge/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

namespace normforge {

RoundedNorm::RoundedNorm(SumNorm norm, double r, double R, Index spot_checks)
    : norm_(std::move(norm)), r_(r), R_(R) {
  if (!(r_ > 0.0) || !(R_ >= r_) || !std::isfinite(R_)) {
    fail(ErrorKind::kInvalidArgument, "RoundedNorm: need 0 < r <= R < inf");
  }
  Rng rng = make_rng(derive_seed(0x726f756e64ULL, "roundedness"));
  for (Index i = 0; i < spot_checks; ++i) {
    const Vector u = unit_direction(norm_.dim(), rng);
    const double ratio = norm_.eval(u);
    if (ratio < r_ * (1.0 - 1e-9) || ratio > R_ * (1.0 + 1e-9)) {
      fail(ErrorKind::kInvalidArgument,
           "RoundedNorm: N(u)/||u|| = " + std::to_string(ratio) + " outside [" +
               std::to_string(r_) + ", " + std::to_string(R_) + "]");
    }
  }
}

std::pair<double, double> probe_rounding(const SumNorm& N, Index probes,
                                         std::uint64_t seed) {
  const Index n = N.dim();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  auto visit = [&](const Vector& u) {
    const double v = N.eval(u);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (Index i = 0; i < n; ++i) visit(Vector::Unit(n, i));
  Rng rng = make_rng(seed);
  for (Index i = 0; i < probes; ++i) visit(unit_direction(n, rng));
  return {lo, hi};
}

SamplerConfig SamplerConfig::resolved(Index n) const {
  SamplerConfig out = *this;
  if (out.burn_in == 0) out.burn_in = 50 * n * n;
  if (out.steps_per_sample == 0) out.steps_per_sample = 10 * n;
  if (out.threads == 0) {
    out.threads = std::max<Index>(1, static_cast<Index>(std::thread::hardware_concurrency()));
  }
  return out;
}

void SamplerConfig::validate() const {
  if (burn_in < 1 || steps_per_sample < 1 || chains < 1 || threads < 1) {
    fail(ErrorKind::kInvalidArgument, "SamplerConfig: counts must be >= 1");
  }
  if (!(chord_tol > 0.0 && chord_tol <= 1e-3)) {
    fail(ErrorKind::kInvalidArgument, "SamplerConfig: chord_tol must lie in (0, 1e-3]");
  }
}

namespace {

// Smallest s > 0 with slice(sign * s) on the boundary of B_N, approached from
// inside so the returned point satisfies 1 - tol <= N <= 1. The map is convex
// along the ray, so the bracket from the triangle-inequality lower bound is
// refined by Illinois-modified regula falsi with a bisection guard.
double boundary_root(const LineSlice& slice, double sign, double n_x, double n_d,
                     double tol, Index& evals) {
  auto g = [&](double s) {
    ++evals;
    return slice.eval(sign * s) - 1.0;
  };
  double s_in = 0.0;
  double g_in = n_x - 1.0;
  double s_out = (1.0 - n_x) / n_d;
  double g_out = g(s_out);
  if (g_out <= 0.0 && g_out >= -tol) return s_out;
  int doublings = 0;
  while (g_out <= 0.0) {
    s_in = s_out;
    g_in = g_out;
    s_out *= 2.0;
    if (++doublings > 200 || !std::isfinite(s_out)) {
      fail(ErrorKind::kChordFailure,
           "chord_endpoints: no boundary crossing along direction (kernel direction?)");
    }
    g_out = g(s_out);
    if (g_out <= 0.0 && g_out >= -tol) return s_out;
  }

  int side = 0;
  for (int iter = 0; iter < 400; ++iter) {
    double s = s_out - g_out * (s_out - s_in) / (g_out - g_in);
    if (!(s > s_in && s < s_out)) s = 0.5 * (s_in + s_out);
    if (s_out - s_in <= 1e-15 * s_out) return s_in;
    const double gs = g(s);
    if (gs <= 0.0) {
      if (gs >= -tol) return s;
      s_in = s;
      g_in = gs;
      if (side == -1) g_out *= 0.5;
      side = -1;
    } else {
      s_out = s;
      g_out = gs;
      if (side == 1) g_in *= 0.5;
      side = 1;
    }
  }
  fail(ErrorKind::kChordFailure, "chord_endpoints: root refinement did not converge");
}

}  // namespace

Chord chord_endpoints(const SumNorm& N, const Vector& x, const Vector& d, double tol) {
  if (!(tol > 0.0)) fail(ErrorKind::kInvalidArgument, "chord_endpoints: tol must be > 0");
  require_finite(x, "chord_endpoints");
  require_finite(d, "chord_endpoints");
  const double n_x = N.eval(x);
  if (!(n_x < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "chord_endpoints: start point outside the unit ball");
  }
  const double n_d = N.eval(d);
  if (!(n_d > 0.0)) {
    fail(ErrorKind::kChordFailure, "chord_endpoints: direction lies in the kernel of N");
  }
  Chord chord;
  chord.evaluations = 2;
  const LineSlice slice(N, x, d);
  chord.upper = boundary_root(slice, 1.0, n_x, n_d, tol, chord.evaluations);
  chord.lower = -boundary_root(slice, -1.0, n_x, n_d, tol, chord.evaluations);
  return chord;
}

namespace {

struct ChainOutput {
  Matrix points;
  WalkDiagnostics diag;
  std::exception_ptr error;
};

ChainOutput run_chain(const RoundedNorm& N, Index count, const SamplerConfig& cfg,
                      Index chain) {
  ChainOutput out;
  const Index n = N.norm().dim();
  out.points.resize(n, count);
  Rng rng = make_rng(derive_seed(cfg.seed, "walk-chain", static_cast<std::uint64_t>(chain)));
  Vector x = Vector::Zero(n);

  auto step = [&] {
    const Vector d = unit_direction(n, rng);
    const Chord chord = chord_endpoints(N.norm(), x, d, cfg.chord_tol);
    std::uniform_real_distribution<double> uni(chord.lower, chord.upper);
    double s = uni(rng);
    while (s == chord.lower) s = uni(rng);
    x += s * d;
    if (!x.allFinite()) fail(ErrorKind::kNonFinite, "uniform_ball_walk: state diverged");
    ++out.diag.steps;
    out.diag.chord_evaluations += chord.evaluations;
  };

  for (Index i = 0; i < cfg.burn_in; ++i) step();
  for (Index j = 0; j < count; ++j) {
    for (Index i = 0; i < cfg.steps_per_sample; ++i) step();
    out.points.col(j) = x;
    out.diag.max_boundary_excess =
        std::max(out.diag.max_boundary_excess, N.norm().eval(x) - 1.0);
  }
  return out;
}

}  // namespace

SampleBatch uniform_ball_walk(const RoundedNorm& N, Index k, const SamplerConfig& cfg_in) {
  if (k < 1) fail(ErrorKind::kInvalidArgument, "uniform_ball_walk: sample count must be >= 1");
  const Index n = N.norm().dim();
  const SamplerConfig cfg = cfg_in.resolved(n);
  cfg.validate();

  const Index chains = std::min(cfg.chains, k);
  std::vector<Index> counts(static_cast<std::size_t>(chains), k / chains);
  for (Index c = 0; c < k % chains; ++c) ++counts[static_cast<std::size_t>(c)];

  std::vector<ChainOutput> outputs(static_cast<std::size_t>(chains));
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index c = next++; c < chains; c = next++) {
      auto& slot = outputs[static_cast<std::size_t>(c)];
      try {
        slot = run_chain(N, counts[static_cast<std::size_t>(c)], cfg, c);
      } catch (...) {
        slot.error = std::current_exception();
      }
    }
  };
  const Index workers = std::min(cfg.threads, chains);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (Index t = 0; t < workers; ++t) pool.emplace_back(worker);
  }

  SampleBatch batch;
  batch.law = SampleLaw::kUniformBall;
  batch.config = cfg;
  batch.points.resize(n, k);
  Index col = 0;
  for (auto& out : outputs) {
    if (out.error) std::rethrow_exception(out.error);
    batch.points.middleCols(col, out.points.cols()) = out.points;
    col += out.points.cols();
    batch.diagnostics.steps += out.diag.steps;
    batch.diagnostics.chord_evaluations += out.diag.chord_evaluations;
    batch.diagnostics.max_boundary_excess =
        std::max(batch.diagnostics.max_boundary_excess, out.diag.max_boundary_excess);
  }
  return batch;
}

SampleBatch radial_resample(const SampleBatch& batch, const SumNorm& N, double phat,
                            Rng& rng) {
  if (!(phat >= 1.0 && phat <= 2.0)) {
    fail(ErrorKind::kInvalidArgument, "radial_resample: phat must lie in [1, 2]");
  }
  if (batch.dim() != N.dim()) {
    fail(ErrorKind::kDimensionMismatch, "radial_resample: batch dimension != dim(N)");
  }
  const double n = static_cast<double>(N.dim());
  std::gamma_distribution<double> gamma(n / phat, 1.0);
  SampleBatch out = batch;
  out.law = SampleLaw::kExpPower;
  out.phat = phat;
  for (Index j = 0; j < batch.count(); ++j) {
    const Vector x = batch.points.col(j);
    const double nx = N.eval(x);
    if (!(nx > 0.0) || !std::isfinite(nx)) {
      fail(ErrorKind::kInvalidArgument, "radial_resample: sample with N(X) = 0");
    }
    const double lambda = std::pow(gamma(rng), 1.0 / phat);
    out.points.col(j) = (lambda / nx) * x;
  }
  return out;
}

SampleBatch sample_mu(const RoundedNorm& N, double phat, Index k, const SamplerConfig& cfg) {
  SampleBatch uniform = uniform_ball_walk(N, k, cfg);
  Rng rng = make_rng(derive_seed(cfg.seed, "radial"));
  return radial_resample(uniform, N.norm(), phat, rng);
}

SampleBatch sample_euclidean_mu(Index n, double scale, double phat, Index k,
                                std::uint64_t seed) {
  if (!(scale > 0.0)) fail(ErrorKind::kInvalidArgument, "sample_euclidean_mu: scale <= 0");
  if (!(phat >= 1.0 && phat <= 2.0)) {
    fail(ErrorKind::kInvalidArgument, "sample_euclidean_mu: phat must lie in [1, 2]");
  }
  Rng rng = make_rng(derive_seed(seed, "euclidean-mu"));
  std::gamma_distribution<double> gamma(static_cast<double>(n) / phat, 1.0);
  SampleBatch batch;
  batch.law = SampleLaw::kExpPower;
  batch.phat = phat;
  batch.config.seed = seed;
  batch.points.resize(n, k);
  for (Index j = 0; j < k; ++j) {
    const Vector u = unit_direction(n, rng);
    const double lambda = std::pow(gamma(rng), 1.0 / phat);
    batch.points.col(j) = (lambda / scale) * u;
  }
  return batch;
}

MomentCheck mean_power_check(const SumNorm& N, const SampleBatch& batch) {
  if (batch.law != SampleLaw::kExpPower || batch.count() == 0) {
    fail(ErrorKind::kInvalidArgument, "mean_power_check: needs a non-empty mu batch");
  }
  const double phat = batch.phat;
  double total = 0.0;
  for (Index j = 0; j < batch.count(); ++j) {
    total += std::pow(N.eval(batch.points.col(j)), phat);
  }
  MomentCheck check;
  const double k = static_cast<double>(batch.count());
  const double n = static_cast<double>(N.dim());
  check.mean = total / k;
  check.expected = n / phat;
  const double band = 4.0 * std::sqrt(n) / std::sqrt(k);
  check.lower = check.expected * (1.0 - band);
  check.upper = check.expected * (1.0 + band);
  check.pass = check.mean >= check.lower && check.mean <= check.upper;
  return check;
}

}  // namespace normforge
