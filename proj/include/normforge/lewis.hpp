#pragma once

#include <string>
#include <vector>

#include "normforge/common.hpp"
#include "normforge/linalg.hpp"
#include "normforge/rng.hpp"
#include "normforge/weights.hpp"

namespace normforge {

/// Rows [start, start + size) of A form one block with inner exponent p.
struct Block {
  Index start = 0;
  Index size = 1;
  double p = 2.0;
};

/// Partition of the k rows of A into blocks with exponents p_j in [2, inf)
/// and outer exponent q in [1, inf).
struct BlockStructure {
  std::vector<Block> blocks;
  double q = 2.0;

  Index block_count() const { return static_cast<Index>(blocks.size()); }
  void validate(Index rows) const;

  static BlockStructure uniform(Index rows, Index block_size, double p, double q);
};

/// N_j(u) for each block.
Vector block_norms(const Vector& u, const BlockStructure& blocks);
/// ||(N_1(u), ..., N_m(u))||_q
double outer_norm(const Vector& u, const BlockStructure& blocks);

struct LewisResult {
  Vector W;       // diagonal, length k
  SymMatrix U;    // (A^T W A)^(-1/2)
  Vector alpha;   // alpha_j(U), length m
  Index iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool monotone_tail = true;
  std::vector<double> residual_tail;
};

/// Damped fixed point W <- W^(1-theta) (u^(p_j-2) N_j(u)^(q-p_j))^theta with
/// u_i = ||(A^T W A)^(-1/2) a_i||_2 and theta = min(1, 2 / max p_j), followed
/// by the n^(1/2 - 1/q) rescale for q > 2. A non-converged run returns the
/// last iterate with converged = false.
LewisResult block_lewis_fixed_point(const Matrix& A, const BlockStructure& blocks,
                                    double tol = 1e-12, Index max_iter = 10000);

struct LewisCertificate {
  bool passed = false;
  bool upper_ok = true;  // N_j(Ax) <= alpha_j ||U^-1 x||_2
  bool lower_ok = true;  // ||U^-1 x||_2 <= N(Ax)
  bool sum_ok = true;    // sum alpha_j^q = n or n^(q/2)
  double worst_upper = 0.0;  // max relative excess, <= 0 when satisfied
  double worst_lower = 0.0;
  double alpha_sum = 0.0;
  double alpha_target = 0.0;
  Index probes = 0;
  std::string failure;
  Vector witness;
};

/// Recomputes U and alpha from result.W and checks both inequalities on
/// random probes plus the alpha-sum identity.
LewisCertificate certify(const LewisResult& result, const Matrix& A,
                         const BlockStructure& blocks, Index probes, Rng& rng,
                         double slack = 1e-9, double sum_tol = 1e-6);

/// rho_j = alpha_j^2 / sum alpha^2.
ProbabilityVector sos_lp_probs(const Matrix& A, const BlockStructure& blocks,
                               const LewisResult& result);

}  // namespace normforge
