#include "normforge/weights.hpp"

#include <cmath>

#include "normforge/linalg.hpp"
#include "normforge/log.hpp"

namespace normforge {

double psi_n(Index n) {
  return std::sqrt(std::log(static_cast<double>(std::max<Index>(n, 3))));
}

Index tau_sample_count(Index n, Index m, double C_w) {
  const double k = C_w * psi_n(n) * std::log(static_cast<double>(m + n));
  return std::max<Index>(1, static_cast<Index>(std::ceil(k)));
}

TauVector estimate_tau(const SumNorm& N, const SampleBatch& batch, double p) {
  if (batch.count() == 0) fail(ErrorKind::kInvalidArgument, "estimate_tau: empty batch");
  if (batch.dim() != N.dim()) {
    fail(ErrorKind::kDimensionMismatch, "estimate_tau: batch dimension != dim(N)");
  }
  if (batch.law != SampleLaw::kExpPower || std::abs(batch.phat - std::min(p, 2.0)) > 1e-12) {
    fail(ErrorKind::kInvalidArgument, "estimate_tau: batch must be drawn with phat = min(p, 2)");
  }
  const Index m = N.size();
  TauVector out;
  out.p = p;
  out.samples = batch.count();
  out.tau = Vector::Zero(m);
  for (Index j = 0; j < batch.count(); ++j) {
    const Vector x = batch.points.col(j);
    for (Index i = 0; i < m; ++i) {
      const double w = N.weights()(i);
      if (w == 0.0) continue;
      out.tau(i) += w * std::pow(eval_term(N.term(i), x), p);
    }
  }
  out.tau *= 1.5 / static_cast<double>(batch.count());
  return out;
}

ProbabilityVector to_probabilities(const Vector& tau) {
  const Index m = tau.size();
  if (m == 0) fail(ErrorKind::kInvalidArgument, "to_probabilities: empty tau");
  if (!tau.allFinite() || tau.minCoeff() < 0.0) {
    fail(ErrorKind::kInvalidArgument, "to_probabilities: tau must be finite and >= 0");
  }
  const double total = tau.sum();
  if (!(total > 0.0)) fail(ErrorKind::kInvalidArgument, "to_probabilities: all-zero tau");
  const double floor = total * 1e-12 / static_cast<double>(m);
  Vector rho = tau.cwiseMax(floor);
  rho /= rho.sum();
  return ProbabilityVector{std::move(rho)};
}

ProbabilityVector to_probabilities(const TauVector& tau) { return to_probabilities(tau.tau); }

ProbabilityVector exact_leverage_probs(const Matrix& A) {
  if (A.rows() == 0) fail(ErrorKind::kInvalidArgument, "exact_leverage_probs: no rows");
  const Index n = A.cols();
  const SymMatrix G = gram(A);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G.matrix());
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(lambda.maxCoeff(), 0.0);
  Index rank = 0;
  Vector inv = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (lambda(i) > cutoff) {
      inv(i) = 1.0 / lambda(i);
      ++rank;
    }
  }
  if (rank == 0) fail(ErrorKind::kRankDeficient, "exact_leverage_probs: zero matrix");
  if (rank < n) {
    log::warn("exact_leverage_probs: rank ", rank, " < ", n,
              "; using the pseudo-inverse on the row span");
  }
  // Rows of B = A V diag(lambda^-1/2) have squared norms equal to the leverages.
  const Matrix B = A * eig.eigenvectors() * inv.cwiseSqrt().asDiagonal();
  Vector rho = B.rowwise().squaredNorm() / static_cast<double>(rank);
  return ProbabilityVector{std::move(rho)};
}

ProbabilityVector exact_leverage_probs(const SumNorm& N) {
  Matrix A(N.size(), N.dim());
  for (Index i = 0; i < N.size(); ++i) {
    const auto* t = std::get_if<LinearTerm>(&N.term(i));
    if (t == nullptr) {
      fail(ErrorKind::kInvalidArgument, "exact_leverage_probs: every term must be linear");
    }
    A.row(i) = std::sqrt(N.weights()(i)) * t->a.transpose();
  }
  return exact_leverage_probs(A);
}

ProbabilityVector augment_with_lewis(const TauVector& tau, const Vector& alpha, double p) {
  if (alpha.size() != tau.tau.size()) {
    fail(ErrorKind::kDimensionMismatch, "augment_with_lewis: alpha length != tau length");
  }
  if (!(p >= 1.0 && p <= 2.0)) {
    fail(ErrorKind::kInvalidArgument, "augment_with_lewis: p must lie in [1, 2]");
  }
  if (alpha.size() > 0 && alpha.minCoeff() < 0.0) {
    fail(ErrorKind::kInvalidArgument, "augment_with_lewis: alpha must be >= 0");
  }
  const Vector mass = tau.tau + alpha.array().pow(p).matrix();
  return to_probabilities(mass);
}

}  // namespace normforge
