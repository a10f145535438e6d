#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "normforge/common.hpp"
#include "normforge/norms.hpp"
#include "normforge/rng.hpp"
#include "normforge/submodular.hpp"

namespace normforge {

struct VerificationReport {
  double max_rel_err = 0.0;
  Vector argmax;
  std::string argmax_family;
  std::map<std::string, Index> probe_counts;
  bool exact = false;
  double epsilon = 0.0;
  bool pass = true;
  bool zero_consistent = true;
  Index skipped = 0;
};

struct ProbeOptions {
  Index budget = 10000;
  std::uint64_t seed = 1;
  double epsilon = 0.0;
  /// Extra probes, e.g. mu-samples from the sampler (columns).
  std::optional<Matrix> mu_samples;
};

/// max over probes of |N(x)^p - Ntilde(x)^p| / N(x)^p, skipping N(x) = 0.
VerificationReport empirical_eps(const SumNorm& N, const SumNorm& Ntilde,
                                 const ProbeOptions& options);

/// Exact max over all cuts of |F(S) - sum_i w_i f_i(S)| / F(S); a cut with
/// F(S) = 0 must also have zero reweighted value. Requires n <= 20.
VerificationReport exact_cut_eps(const CutFunction& F, const Vector& w,
                                 double epsilon = 0.0);

struct SeminormCheck {
  bool homogeneity = true;
  bool triangle = true;
  bool symmetry = true;
  double worst_homogeneity = 0.0;
  double worst_triangle = 0.0;
  double worst_symmetry = 0.0;
  Index trials = 0;

  bool pass() const { return homogeneity && triangle && symmetry; }
};

SeminormCheck seminorm_suite(const SumNorm& N, Index trials, Rng& rng,
                             double tol = 1e-10);

}  // namespace normforge
