#include "normforge/verify.hpp"

#include <algorithm>
#include <cmath>

namespace normforge {

VerificationReport empirical_eps(const SumNorm& N, const SumNorm& Ntilde,
                                 const ProbeOptions& options) {
  if (N.dim() != Ntilde.dim()) {
    fail(ErrorKind::kDimensionMismatch, "empirical_eps: norms live on different spaces");
  }
  if (N.p() != Ntilde.p()) {
    fail(ErrorKind::kInvalidArgument, "empirical_eps: norms use different powers");
  }
  if (options.budget < 1) fail(ErrorKind::kInvalidArgument, "empirical_eps: budget < 1");
  const Index n = N.dim();
  if (options.mu_samples && options.mu_samples->rows() != n) {
    fail(ErrorKind::kDimensionMismatch, "empirical_eps: mu samples have the wrong dimension");
  }

  VerificationReport report;
  report.epsilon = options.epsilon;
  Rng rng = make_rng(derive_seed(options.seed, "verify"));

  auto probe = [&](const Vector& x, const char* family) {
    ++report.probe_counts[family];
    const double a = N.eval_power(x);
    const double b = Ntilde.eval_power(x);
    if (a <= 0.0) {
      ++report.skipped;
      if (b > 0.0) report.zero_consistent = false;
      return;
    }
    const double err = std::abs(a - b) / a;
    if (err > report.max_rel_err || report.argmax.size() == 0) {
      report.max_rel_err = std::max(report.max_rel_err, err);
      report.argmax = x;
      report.argmax_family = family;
    }
  };

  Index remaining = options.budget;
  for (Index i = 0; i < n && remaining > 0; ++i, --remaining) {
    probe(Vector::Unit(n, i), "coordinate");
  }
  Index pair_budget = std::min(remaining / 4, n * (n - 1) / 2);
  for (Index i = 0; i < n && pair_budget > 0; ++i) {
    for (Index j = i + 1; j < n && pair_budget > 0; ++j, --pair_budget, --remaining) {
      probe(Vector::Unit(n, i) - Vector::Unit(n, j), "pairwise");
    }
  }
  if (options.mu_samples) {
    const Matrix& mu = *options.mu_samples;
    for (Index j = 0; j < mu.cols() && remaining > 0; ++j, --remaining) {
      probe(mu.col(j), "mu");
    }
  }
  const Index gaussian = remaining / 2;
  for (Index j = 0; j < gaussian; ++j) probe(gaussian_vector(n, rng), "gaussian");
  for (Index j = gaussian; j < remaining; ++j) probe(unit_direction(n, rng), "sphere");

  report.pass = report.zero_consistent &&
                (options.epsilon <= 0.0 || report.max_rel_err <= options.epsilon);
  return report;
}

VerificationReport exact_cut_eps(const CutFunction& F, const Vector& w, double epsilon) {
  const Index n = F.ground_size();
  if (n < 1 || n > 20) fail(ErrorKind::kInvalidArgument, "exact_cut_eps: need 1 <= n <= 20");
  if (w.size() != F.component_count()) {
    fail(ErrorKind::kDimensionMismatch, "exact_cut_eps: weight length != component count");
  }
  const auto& comps = F.components();
  std::vector<std::uint32_t> masks;
  masks.reserve(comps.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    std::uint32_t m = 0;
    for (Index v : comps[i].vertices) m |= std::uint32_t{1} << v;
    masks.push_back(m);
    scale += std::abs(comps[i].weight) + std::abs(w(static_cast<Index>(i)) * comps[i].weight);
  }

  VerificationReport report;
  report.exact = true;
  report.epsilon = epsilon;
  // Cuts are symmetric, so subsets avoiding vertex n - 1 cover every cut.
  const std::uint32_t limit = std::uint32_t{1} << (n - 1);
  for (std::uint32_t s = 0; s < limit; ++s) {
    double exact = 0.0;
    double approx = 0.0;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      const std::uint32_t inside = s & masks[i];
      if (inside != 0 && inside != masks[i]) {
        exact += comps[i].weight;
        approx += w(static_cast<Index>(i)) * comps[i].weight;
      }
    }
    ++report.probe_counts["cut"];
    if (exact <= 0.0) {
      ++report.skipped;
      if (std::abs(approx) > 1e-12 * std::max(scale, 1.0)) report.zero_consistent = false;
      continue;
    }
    const double err = std::abs(exact - approx) / exact;
    if (err > report.max_rel_err || report.argmax.size() == 0) {
      report.max_rel_err = std::max(report.max_rel_err, err);
      report.argmax = Vector::Zero(n);
      for (Index v = 0; v < n; ++v) report.argmax(v) = (s >> v) & 1U ? 1.0 : 0.0;
      report.argmax_family = "cut";
    }
  }
  report.pass = report.zero_consistent && (epsilon <= 0.0 || report.max_rel_err <= epsilon);
  return report;
}

SeminormCheck seminorm_suite(const SumNorm& N, Index trials, Rng& rng, double tol) {
  SeminormCheck check;
  const Index n = N.dim();
  std::normal_distribution<double> normal;
  for (Index t = 0; t < trials; ++t) {
    const Vector x = gaussian_vector(n, rng);
    const Vector y = gaussian_vector(n, rng);
    const double c = 3.0 * normal(rng);
    const double nx = N.eval(x);
    const double ny = N.eval(y);
    const double scale = std::max({nx, ny, 1e-300});

    const double hom = std::abs(N.eval(c * x) - std::abs(c) * nx) / std::max(std::abs(c) * nx, 1e-300);
    const double tri = (N.eval(x + y) - nx - ny) / scale;
    const double sym = std::abs(N.eval(-x) - nx) / std::max(nx, 1e-300);

    check.worst_homogeneity = std::max(check.worst_homogeneity, nx > 0.0 ? hom : 0.0);
    check.worst_triangle = std::max(check.worst_triangle, tri);
    check.worst_symmetry = std::max(check.worst_symmetry, nx > 0.0 ? sym : 0.0);
    ++check.trials;
  }
  check.homogeneity = check.worst_homogeneity <= tol;
  check.triangle = check.worst_triangle <= tol;
  check.symmetry = check.worst_symmetry <= tol;
  return check;
}

}  // namespace normforge
