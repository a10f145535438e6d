#include "normforge/submodular.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "normforge/log.hpp"

namespace normforge {

double SetFunction::value_mask(std::uint64_t mask) const {
  if (n_ > 62) fail(ErrorKind::kInvalidArgument, "value_mask: ground set larger than 62");
  std::vector<Index> subset;
  for (Index i = 0; i < n_; ++i) {
    if (mask & (std::uint64_t{1} << i)) subset.push_back(i);
  }
  return value(subset);
}

double SetFunction::extension(const Vector& x) const { return lovasz_extension(*this, x); }

CutFunction::CutFunction(Index n, std::vector<Component> components)
    : SetFunction(n, SetFunctionFlags{true, true}), components_(std::move(components)) {
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
      fail(ErrorKind::kInvalidArgument, "CutFunction: weights must be finite and >= 0");
    }
    for (Index v : c.vertices) {
      if (v < 0 || v >= n) fail(ErrorKind::kDimensionMismatch, "CutFunction: vertex out of range");
    }
  }
}

CutFunction CutFunction::from_edges(
    Index n, const std::vector<std::tuple<Index, Index, double>>& edges) {
  std::vector<Component> comps;
  comps.reserve(edges.size());
  for (const auto& [u, v, c] : edges) comps.push_back(Component{{u, v}, c});
  return CutFunction(n, std::move(comps));
}

double CutFunction::component_value(Index i, const std::vector<char>& in_set) const {
  const auto& comp = components_[static_cast<std::size_t>(i)];
  bool inside = false;
  bool outside = false;
  for (Index v : comp.vertices) {
    if (in_set[static_cast<std::size_t>(v)]) {
      inside = true;
    } else {
      outside = true;
    }
    if (inside && outside) return comp.weight;
  }
  return 0.0;
}

double CutFunction::value(const std::vector<char>& in_set) const {
  double total = 0.0;
  for (Index i = 0; i < component_count(); ++i) total += component_value(i, in_set);
  return total;
}

double CutFunction::value(std::span<const Index> subset) const {
  thread_local std::vector<char> in_set;
  in_set.assign(static_cast<std::size_t>(ground_size()), 0);
  for (Index v : subset) in_set[static_cast<std::size_t>(v)] = 1;
  return value(in_set);
}

double CutFunction::extension(const Vector& x) const {
  if (x.size() != ground_size()) fail(ErrorKind::kDimensionMismatch, "CutFunction: dim(x) != n");
  require_finite(x, "CutFunction::extension");
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.vertices.size() < 2) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Index v : c.vertices) {
      lo = std::min(lo, x(v));
      hi = std::max(hi, x(v));
    }
    total += c.weight * (hi - lo);
  }
  return total;
}

std::shared_ptr<const CutFunction> CutFunction::component_function(Index i) const {
  return std::make_shared<CutFunction>(ground_size(),
                                       std::vector<Component>{components_[static_cast<std::size_t>(i)]});
}

CutFunction cut_function_from(const SumNorm& N) {
  std::vector<CutFunction::Component> comps;
  const double p = N.p();
  for (Index i = 0; i < N.size(); ++i) {
    const NormTerm& term = N.term(i);
    const double w = N.weights()(i);
    if (const auto* e = std::get_if<GraphEdgeTerm>(&term)) {
      comps.push_back({{e->u, e->v}, w * std::pow(e->c, p)});
    } else if (const auto* h = std::get_if<HyperedgeTerm>(&term)) {
      comps.push_back({h->vertices, w * std::pow(h->c, p / 2.0)});
    } else {
      fail(ErrorKind::kInvalidArgument,
           "cut_function_from: term " + std::to_string(i) + " is " + term_kind(term) +
               ", expected graph_edge or hyperedge");
    }
  }
  return CutFunction(N.dim(), std::move(comps));
}

double lovasz_extension(const SetFunction& f, const Vector& x) {
  const Index n = f.ground_size();
  if (x.size() != n) fail(ErrorKind::kDimensionMismatch, "lovasz_extension: dim(x) != n");
  require_finite(x, "lovasz_extension");

  thread_local std::vector<Index> order;
  thread_local std::vector<double> prefix;
  thread_local std::vector<double> parts;
  order.resize(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return x(a) < x(b); });

  prefix.resize(static_cast<std::size_t>(n) + 1);
  for (Index k = 0; k <= n; ++k) {
    prefix[static_cast<std::size_t>(k)] =
        f.value(std::span<const Index>(order.data(), static_cast<std::size_t>(k)));
  }
  double scale = 1.0;
  for (double v : prefix) scale = std::max(scale, std::abs(v));
  if (std::abs(prefix.front()) > 1e-12 * scale) {
    fail(ErrorKind::kInvalidArgument, "lovasz_extension: f(empty) != 0");
  }
  if (std::abs(prefix.back()) > 1e-12 * scale) {
    fail(ErrorKind::kInvalidArgument, "lovasz_extension: f(V) != 0, integral diverges");
  }

  // Summing the level-set contributions in sorted order makes the result
  // independent of orientation, so fbar(-x) == fbar(x) bit for bit when f is
  // symmetric.
  parts.clear();
  for (Index k = 1; k < n; ++k) {
    const double gap = x(order[static_cast<std::size_t>(k)]) - x(order[static_cast<std::size_t>(k - 1)]);
    if (gap > 0.0) parts.push_back(prefix[static_cast<std::size_t>(k)] * gap);
  }
  std::sort(parts.begin(), parts.end());
  double total = 0.0;
  for (double v : parts) total += v;
  return total;
}

SetFunctionCheck check_set_function(const SetFunction& f, Index trials, Rng& rng) {
  const Index n = f.ground_size();
  SetFunctionCheck check;
  check.trials = trials;
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<Index> pick(0, std::max<Index>(n - 1, 0));

  auto subset_of = [&](const std::vector<char>& in) {
    std::vector<Index> s;
    for (Index i = 0; i < n; ++i) {
      if (in[static_cast<std::size_t>(i)]) s.push_back(i);
    }
    return s;
  };

  const double empty = f.value(std::span<const Index>());
  double scale = std::max(1.0, std::abs(empty));
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  scale = std::max(scale, std::abs(f.value(all)));

  for (Index trial = 0; trial < trials; ++trial) {
    std::vector<char> in_s(static_cast<std::size_t>(n)), in_t(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      in_s[static_cast<std::size_t>(i)] = coin(rng);
      in_t[static_cast<std::size_t>(i)] = in_s[static_cast<std::size_t>(i)] || coin(rng);
    }
    std::vector<char> in_c(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) in_c[static_cast<std::size_t>(i)] = !in_s[static_cast<std::size_t>(i)];
    const double fs = f.value(subset_of(in_s));
    const double fc = f.value(subset_of(in_c));
    scale = std::max({scale, std::abs(fs), std::abs(fc)});
    if (std::abs(fs - fc) > 1e-9 * scale) check.symmetric = false;

    // Diminishing returns for S subset of T and v outside T.
    const Index v = pick(rng);
    if (n == 0 || in_t[static_cast<std::size_t>(v)]) continue;
    const double ft = f.value(subset_of(in_t));
    auto with_v = [&](std::vector<char> in) {
      in[static_cast<std::size_t>(v)] = 1;
      return f.value(subset_of(in));
    };
    const double gain_s = with_v(in_s) - fs;
    const double gain_t = with_v(in_t) - ft;
    if (gain_s < gain_t - 1e-9 * scale) check.submodular = false;
  }
  check.empty_is_zero = std::abs(empty) <= 1e-12 * scale;
  return check;
}

SfmResult sfm_sparsify(const std::vector<std::shared_ptr<const SetFunction>>& fs,
                       double epsilon, const SfmOptions& options) {
  const Index m = static_cast<Index>(fs.size());
  if (m == 0) fail(ErrorKind::kInvalidArgument, "sfm_sparsify: no set functions");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "sfm_sparsify: epsilon must lie in (0, 1)");
  }
  const Index n = fs.front()->ground_size();
  Rng check_rng = make_rng(derive_seed(options.config.seed, "sfm-check"));
  for (Index i = 0; i < m; ++i) {
    const auto& f = fs[static_cast<std::size_t>(i)];
    if (!f || f->ground_size() != n) {
      fail(ErrorKind::kDimensionMismatch, "sfm_sparsify: ground sets differ");
    }
    if (!f->flags().symmetric) {
      fail(ErrorKind::kInvalidArgument,
           "sfm_sparsify: set function " + std::to_string(i) + " is not flagged symmetric");
    }
    const SetFunctionCheck check = check_set_function(*f, 32, check_rng);
    if (!check.symmetric || !check.empty_is_zero) {
      fail(ErrorKind::kInvalidArgument,
           "sfm_sparsify: set function " + std::to_string(i) +
               " failed the symmetry / f(empty) = 0 spot check");
    }
  }

  SfmResult result;
  if (epsilon < 1.0 / std::sqrt(static_cast<double>(m))) {
    result.below_min_epsilon = true;
    log::warn("sfm_sparsify: epsilon ", epsilon, " < m^-1/2 = ",
              1.0 / std::sqrt(static_cast<double>(m)), "; guarantee does not apply");
  }
  if (m == 1) {
    result.weights = Vector::Ones(1);
    result.weight_sum = 1.0;
    return result;
  }

  double max_value = options.max_value;
  if (max_value <= 0.0) {
    if (n > 20) {
      fail(ErrorKind::kInvalidArgument,
           "sfm_sparsify: max_value must be supplied for ground sets larger than 20");
    }
    for (const auto& f : fs) {
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        max_value = std::max(max_value, f->value_mask(mask));
      }
    }
  }

  const double md = static_cast<double>(m);
  const double shift = std::pow(md, -5.0);
  std::vector<NormTerm> terms;
  terms.reserve(fs.size());
  for (const auto& f : fs) terms.push_back(lovasz(f, shift));
  const SumNorm F(n, 1.0, std::move(terms));
  const double r = std::pow(md, -4.0);
  // fbar_i(x) <= max f_i * (max x - min x) <= sqrt(2) max f_i ||x||_2.
  const double R = md * (std::sqrt(2.0) * std::max(max_value, 1e-300) + shift);

  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    SparsifyConfig cfg = options.config;
    cfg.p = 1.0;
    cfg.seed = derive_seed(options.config.seed, "sfm-attempt", static_cast<std::uint64_t>(attempt));
    cfg.sampler.seed = derive_seed(cfg.seed, "sampler");
    SparsifierResult run = homotopy_sparsify(F, r, R, epsilon, cfg);
    result.attempts = attempt + 1;
    result.weight_sum = run.weights.sum();
    result.weights = run.weights;
    result.last = std::move(run);
    if (result.weight_sum <= 2.0 * md) return result;
    log::info("sfm_sparsify: attempt ", attempt, " has sum w = ", result.weight_sum,
              " > 2m; retrying");
  }
  fail(ErrorKind::kRetriesExhausted,
       "sfm_sparsify: sum of weights exceeded 2m on every attempt");
}

}  // namespace normforge
