#include "normforge/lewis.hpp"

#include <algorithm>
#include <cmath>

#include "normforge/log.hpp"

namespace normforge {

void BlockStructure::validate(Index rows) const {
  if (!(q >= 1.0) || !std::isfinite(q)) {
    fail(ErrorKind::kInvalidArgument, "BlockStructure: q must lie in [1, inf)");
  }
  Index next = 0;
  for (const Block& b : blocks) {
    if (b.start != next || b.size < 1) {
      fail(ErrorKind::kInvalidArgument,
           "BlockStructure: blocks must be nonempty consecutive ranges covering the rows");
    }
    if (!(b.p >= 2.0) || !std::isfinite(b.p)) {
      fail(ErrorKind::kInvalidArgument, "BlockStructure: block exponents must lie in [2, inf)");
    }
    next += b.size;
  }
  if (next != rows) {
    fail(ErrorKind::kDimensionMismatch, "BlockStructure: blocks cover " +
                                            std::to_string(next) + " rows, matrix has " +
                                            std::to_string(rows));
  }
}

BlockStructure BlockStructure::uniform(Index rows, Index block_size, double p, double q) {
  if (block_size < 1 || rows % block_size != 0) {
    fail(ErrorKind::kInvalidArgument, "BlockStructure::uniform: block size must divide rows");
  }
  BlockStructure out;
  out.q = q;
  for (Index s = 0; s < rows; s += block_size) out.blocks.push_back({s, block_size, p});
  return out;
}

Vector block_norms(const Vector& u, const BlockStructure& blocks) {
  Vector out(blocks.block_count());
  for (Index j = 0; j < blocks.block_count(); ++j) {
    const Block& b = blocks.blocks[static_cast<std::size_t>(j)];
    out(j) = std::pow(u.segment(b.start, b.size).array().abs().pow(b.p).sum(), 1.0 / b.p);
  }
  return out;
}

double outer_norm(const Vector& u, const BlockStructure& blocks) {
  return std::pow(block_norms(u, blocks).array().pow(blocks.q).sum(), 1.0 / blocks.q);
}

namespace {

// u_i = ||U a_i||_2 for U = (A^T W A)^(-1/2).
Vector row_lengths(const Matrix& A, const SymMatrix& U) {
  return (U.matrix() * A.transpose()).colwise().norm().transpose();
}

// u_i^(p_j - 2) N_j(u)^(q - p_j)
Vector lewis_update(const Vector& u, const BlockStructure& blocks) {
  const Vector nj = block_norms(u, blocks);
  Vector out(u.size());
  for (Index j = 0; j < blocks.block_count(); ++j) {
    const Block& b = blocks.blocks[static_cast<std::size_t>(j)];
    for (Index i = b.start; i < b.start + b.size; ++i) {
      out(i) = nj(j) > 0.0 ? std::pow(u(i), b.p - 2.0) * std::pow(nj(j), blocks.q - b.p) : 0.0;
    }
  }
  return out;
}

double alpha_target(Index n, double q) {
  const double nd = static_cast<double>(n);
  return q <= 2.0 ? nd : std::pow(nd, q / 2.0);
}

}  // namespace

LewisResult block_lewis_fixed_point(const Matrix& A, const BlockStructure& blocks, double tol,
                                    Index max_iter) {
  blocks.validate(A.rows());
  if (!A.allFinite()) fail(ErrorKind::kNonFinite, "block_lewis_fixed_point: non-finite A");
  if (!(tol > 0.0) || max_iter < 1) {
    fail(ErrorKind::kInvalidArgument, "block_lewis_fixed_point: need tol > 0, max_iter >= 1");
  }
  const Index n = A.cols();
  const Index k = A.rows();
  {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram(A).matrix(), Eigen::EigenvaluesOnly);
    const Vector& lambda = eig.eigenvalues();
    if (n == 0 || lambda(0) <= 1e-12 * std::max(lambda(n - 1), 0.0) || lambda(n - 1) <= 0.0) {
      fail(ErrorKind::kRankDeficient, "block_lewis_fixed_point: rank(A) < n");
    }
  }

  double pmax = 2.0;
  for (const Block& b : blocks.blocks) pmax = std::max(pmax, b.p);
  const double theta = std::min(1.0, 2.0 / pmax);

  LewisResult result;
  Vector W = Vector::Ones(k);
  for (Index it = 1; it <= max_iter; ++it) {
    const SymMatrix U = inv_sqrt(gram(A, W));
    const Vector target = lewis_update(row_lengths(A, U), blocks);
    double residual = 0.0;
    for (Index i = 0; i < k; ++i) {
      residual = std::max(residual, std::abs(W(i) - target(i)) / (W(i) + 1e-300));
    }
    result.iterations = it;
    result.residual = residual;
    result.residual_tail.push_back(residual);
    if (result.residual_tail.size() > 10) {
      result.residual_tail.erase(result.residual_tail.begin());
    }
    if (residual <= tol) {
      result.converged = true;
      break;
    }
    W = W.array().pow(1.0 - theta) * target.array().pow(theta);
  }

  for (std::size_t i = 1; i < result.residual_tail.size(); ++i) {
    if (result.residual_tail[i] > result.residual_tail[i - 1] * (1.0 + 1e-9) + 1e-15) {
      result.monotone_tail = false;
    }
  }
  if (!result.monotone_tail) {
    log::warn("block_lewis_fixed_point: residual not monotone over the last iterations; "
              "A may be ill-conditioned");
  }
  if (!result.converged) {
    log::warn("block_lewis_fixed_point: no convergence after ", max_iter,
              " iterations (residual ", result.residual, ")");
  }

  if (blocks.q > 2.0) {
    W *= std::pow(static_cast<double>(n), -(1.0 - 2.0 / blocks.q));
  }
  result.W = W;
  result.U = inv_sqrt(gram(A, W));
  result.alpha = block_norms(row_lengths(A, result.U), blocks);
  return result;
}

LewisCertificate certify(const LewisResult& result, const Matrix& A,
                         const BlockStructure& blocks, Index probes, Rng& rng, double slack,
                         double sum_tol) {
  blocks.validate(A.rows());
  if (result.W.size() != A.rows()) {
    fail(ErrorKind::kDimensionMismatch, "certify: W length != rows(A)");
  }
  const Index n = A.cols();
  const SymMatrix G = gram(A, result.W);
  const SymMatrix U = inv_sqrt(G);
  const Vector alpha = block_norms(row_lengths(A, U), blocks);

  LewisCertificate cert;
  cert.alpha_sum = alpha.array().pow(blocks.q).sum();
  cert.alpha_target = alpha_target(n, blocks.q);
  cert.sum_ok = std::abs(cert.alpha_sum - cert.alpha_target) <= sum_tol;
  if (!cert.sum_ok) {
    cert.failure = "alpha-sum identity: sum alpha^q = " + std::to_string(cert.alpha_sum) +
                   ", expected " + std::to_string(cert.alpha_target);
  }
  cert.worst_upper = -std::numeric_limits<double>::infinity();
  cert.worst_lower = -std::numeric_limits<double>::infinity();

  // Random probes plus x = U^2 a_i, which makes the first inequality tight for row i.
  const Matrix UUAt = U.matrix() * (U.matrix() * A.transpose());
  const Index total = probes + A.rows();
  for (Index s = 0; s < total; ++s) {
    const Vector x = s < probes ? gaussian_vector(n, rng) : Vector(UUAt.col(s - probes));
    const double ux = std::sqrt(std::max(0.0, x.dot(G.matrix() * x)));
    const Vector Ax = A * x;
    const Vector nj = block_norms(Ax, blocks);
    const double nAx = std::pow(nj.array().pow(blocks.q).sum(), 1.0 / blocks.q);
    ++cert.probes;
    for (Index j = 0; j < nj.size(); ++j) {
      const double bound = alpha(j) * ux;
      if (bound <= 0.0) {
        if (nj(j) > 0.0) cert.worst_upper = std::numeric_limits<double>::infinity();
        continue;
      }
      const double excess = nj(j) / bound - 1.0;
      if (excess > cert.worst_upper) {
        cert.worst_upper = excess;
        if (excess > slack && cert.upper_ok) {
          cert.upper_ok = false;
          cert.witness = x;
          if (cert.failure.empty()) {
            cert.failure = "N_j(Ax) <= alpha_j ||U^-1 x|| violated for block " +
                           std::to_string(j);
          }
        }
      }
    }
    if (nAx > 0.0) {
      const double excess = ux / nAx - 1.0;
      if (excess > cert.worst_lower) {
        cert.worst_lower = excess;
        if (excess > slack && cert.lower_ok) {
          cert.lower_ok = false;
          if (cert.witness.size() == 0) cert.witness = x;
          if (cert.failure.empty()) cert.failure = "||U^-1 x|| <= N(Ax) violated";
        }
      }
    }
  }
  if (cert.worst_upper > slack) cert.upper_ok = false;
  cert.passed = cert.upper_ok && cert.lower_ok && cert.sum_ok;
  return cert;
}

ProbabilityVector sos_lp_probs(const Matrix& A, const BlockStructure& blocks,
                               const LewisResult& result) {
  blocks.validate(A.rows());
  if (blocks.q != 2.0) {
    fail(ErrorKind::kInvalidArgument, "sos_lp_probs: requires q = 2");
  }
  const Vector alpha = result.alpha.size() == blocks.block_count()
                           ? result.alpha
                           : block_norms(row_lengths(A, inv_sqrt(gram(A, result.W))), blocks);
  const double total = alpha.squaredNorm();
  if (!(total > 0.0)) fail(ErrorKind::kInvalidArgument, "sos_lp_probs: alpha is all zero");
  ProbabilityVector out;
  out.rho = alpha.array().square() / total;
  return out;
}

}  // namespace normforge
