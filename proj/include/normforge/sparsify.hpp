#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "normforge/common.hpp"
#include "normforge/norms.hpp"
#include "normforge/sampler.hpp"
#include "normforge/weights.hpp"

namespace normforge {

struct Rounding {
  double r = 1.0;
  double R = 1.0;
};

struct SparsifyConfig {
  double epsilon = 0.25;
  double C_M = 0.5;
  double p = 1.0;
  /// Sampling surrogate for p > 2; defaults to a Euclidean norm.
  std::optional<SumNorm> surrogate;
  /// Declared rounding of N on ker(N)^perp for the homotopy (p <= 2).
  std::optional<Rounding> rounding;
  Index k_tau = 0;  // 0: tau_sample_count(n, m, C_w)
  double C_w = 200.0;
  SamplerConfig sampler;
  std::uint64_t seed = 1;
  int max_retries = 3;
  /// Equivalence ratio above which the default p > 2 surrogate draws a warning.
  double surrogate_warn_ratio = 4.0;
  Index equivalence_probes = 256;

  void validate() const;
};

struct StageRecord {
  int stage = 0;
  double t = 0.0;        // regularizer scale targeted by this stage
  double epsilon = 0.0;  // accuracy targeted by this stage
  Index M = 0;
  Index support = 0;
  double equivalence_ratio = 0.0;
  int attempts = 0;
  double seconds = 0.0;
  std::uint64_t evaluations = 0;
};

struct SparsifierResult {
  Vector weights;
  Vector counts;
  Index M = 0;
  std::vector<Index> support;
  std::vector<StageRecord> stage_log;
  std::uint64_t seed = 0;
  Vector tau;
  Vector rho;
  std::vector<std::string> warnings;
  double smoothness_proxy = 0.0;
  double equivalence_ratio = 0.0;
};

/// Draw count for accuracy epsilon:
///   p <= 2: ceil(C_M n log(n/eps)^p psi_n^p log(n)^2 / eps^2)
///   p > 2:  ceil(C_M ((n+p)/2)^(p/2) p^2 (log(n/eps) log(n) psi_n)^2 / eps^2)
/// with log(n) read as log(max(n, 3)).
Index choose_M(Index n, double epsilon, double p, double C_M);

/// Multinomial draw of M indices from rho; w_i = c_i / (M rho_i).
SparsifierResult sample_support(const ProbabilityVector& rho, Index M, Rng& rng);

/// estimate_tau -> to_probabilities -> choose_M -> sample_support, with the
/// batch drawn against a norm 2-equivalent to N.
SparsifierResult sparsify_once(const SumNorm& N, const SampleBatch& batch,
                               const SparsifyConfig& cfg);

/// Sparsify from given probabilities (e.g. exact leverage or Lewis scores).
SparsifierResult sparsify_with_probabilities(const ProbabilityVector& rho,
                                             Index n, const SparsifyConfig& cfg);

/// Homotopy driver over N_t = (N^p + (t ||x||_2)^p)^(1/p), t halving from R
/// to below eps r, then a final eps/3 pass with the regularizer stripped.
SparsifierResult homotopy_sparsify(const SumNorm& N, double r, double R,
                                   double epsilon, const SparsifyConfig& cfg);

/// Entry point by power: homotopy for p <= 2, surrogate sampling for p > 2.
SparsifierResult sparsify_p_power(const SumNorm& N, const SparsifyConfig& cfg);

/// max over probes of max(A/B, B/A) for two sum norms on the same space.
double equivalence_ratio(const SumNorm& A, const SumNorm& B, const Matrix& probes);

/// Largest observed S with (N(x+y)^p + N(x-y)^p)/2 <= N(x)^p + S^p N(y)^p.
double smoothness_proxy(const SumNorm& N, double p, Index trials, std::uint64_t seed);

}  // namespace normforge
