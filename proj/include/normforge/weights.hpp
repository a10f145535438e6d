#pragma once

#include "normforge/common.hpp"
#include "normforge/norms.hpp"
#include "normforge/sampler.hpp"

namespace normforge {

struct TauVector {
  Vector tau;
  double p = 1.0;
  Index samples = 0;
};

/// Sampling distribution over terms; entries positive, sum 1.
struct ProbabilityVector {
  Vector rho;

  Index size() const { return rho.size(); }
  double operator[](Index i) const { return rho(i); }
};

/// Concentration constant used in sample-count heuristics: sqrt(log max(n, 3)).
double psi_n(Index n);

/// ceil(C_w psi_n log(m + n)) samples for the tau estimate.
Index tau_sample_count(Index n, Index m, double C_w = 200.0);

/// tau_i = 3/2 * (1/k) sum_j w_i N_i(X_j)^p.
TauVector estimate_tau(const SumNorm& N, const SampleBatch& batch, double p);

/// rho_i = max(tau_i, f) / sum_j max(tau_j, f), f = ||tau||_1 1e-12 / m.
ProbabilityVector to_probabilities(const TauVector& tau);
ProbabilityVector to_probabilities(const Vector& tau);

/// rho_i = <a_i, (A^T A)^+ a_i> / rank(A) for the rows a_i of A.
ProbabilityVector exact_leverage_probs(const Matrix& A);
/// Same, for a norm made only of Linear terms (weights fold in as sqrt(w_i)).
ProbabilityVector exact_leverage_probs(const SumNorm& N);

/// rho_i proportional to tau_i + alpha_i^p.
ProbabilityVector augment_with_lewis(const TauVector& tau, const Vector& alpha,
                                     double p);

}  // namespace normforge
