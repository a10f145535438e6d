#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "normforge/common.hpp"

namespace normforge {

class SetFunction;

// ---------------------------------------------------------------------------
// Term variants. Each one is a semi-norm on R^n.

/// |<a, x>|
struct LinearTerm {
  Vector a;
};

/// c |x_u - x_v|
struct GraphEdgeTerm {
  Index u = 0;
  Index v = 0;
  double c = 1.0;
};

/// sqrt(c) * max_{u,v in e} |x_u - x_v|
struct HyperedgeTerm {
  std::vector<Index> vertices;
  double c = 1.0;
};

/// ||A x||_p with p in [1, inf]; p = inf is the max of absolute entries.
struct LpImageTerm {
  Matrix rows;
  double p = 2.0;
};

/// Lovasz extension of a symmetric set function, optionally shifted by a
/// Euclidean regularizer: fbar(x) + regularizer * ||x||_2.
struct LovaszTerm {
  std::shared_ptr<const SetFunction> f;
  double regularizer = 0.0;
};

/// t ||x||_2
struct EuclideanTerm {
  double t = 1.0;
};

using NormTerm = std::variant<LinearTerm, GraphEdgeTerm, HyperedgeTerm,
                              LpImageTerm, LovaszTerm, EuclideanTerm>;

NormTerm linear(Vector a);
NormTerm graph_edge(Index u, Index v, double c = 1.0);
NormTerm hyperedge(std::vector<Index> vertices, double c = 1.0);
NormTerm lp_image(Matrix rows, double p);
NormTerm lovasz(std::shared_ptr<const SetFunction> f, double regularizer = 0.0);
NormTerm euclidean(double t = 1.0);

std::string term_kind(const NormTerm& term);

/// Throws unless the term is well formed for dimension n.
void validate_term(const NormTerm& term, Index n);

/// N_i(x). Pure; counts one term evaluation.
double eval_term(const NormTerm& term, const Vector& x);

// ---------------------------------------------------------------------------

/// N(x)^p = sum_i w_i N_i(x)^p. Immutable after construction.
class SumNorm {
 public:
  SumNorm(Index dim, double p, std::vector<NormTerm> terms);
  SumNorm(Index dim, double p, std::vector<NormTerm> terms, Vector weights);

  Index dim() const { return dim_; }
  double p() const { return p_; }
  double phat() const { return p_ < 2.0 ? p_ : 2.0; }
  Index size() const { return static_cast<Index>(terms_.size()); }
  const std::vector<NormTerm>& terms() const { return terms_; }
  const NormTerm& term(Index i) const { return terms_[static_cast<std::size_t>(i)]; }
  const Vector& weights() const { return weights_; }

  /// Position of term i in the list this norm was derived from through
  /// apply_weights; identity for a freshly built norm.
  const std::vector<Index>& origin() const { return origin_; }

  /// w_i N_i(x)^p
  double term_power(Index i, const Vector& x) const;
  /// sum_i w_i N_i(x)^p
  double eval_power(const Vector& x) const;
  /// (sum_i w_i N_i(x)^p)^(1/p)
  double eval(const Vector& x) const;

  /// Same norm with one extra term appended at the given weight.
  SumNorm with_term(NormTerm term, double weight = 1.0) const;
  /// Same terms and weights scaled so the result is c * N.
  SumNorm scaled(double c) const;

 private:
  friend SumNorm apply_weights(const SumNorm& N, const Vector& w);

  Index dim_;
  double p_;
  std::vector<NormTerm> terms_;
  Vector weights_;
  std::vector<Index> origin_;
};

double eval_sum(const SumNorm& N, const Vector& x);

/// Reweighted copy: term i gets weight N.weights()(i) * w(i) and terms with
/// w(i) = 0 are dropped. The returned norm's origin() maps kept terms back
/// to positions in N.
SumNorm apply_weights(const SumNorm& N, const Vector& w);

/// Restriction t -> N(x + t d) of a sum norm to a line, with per-term data
/// precomputed so each evaluation costs O(m) for the rank-one variants.
/// Holds a pointer to N, which must outlive the slice.
class LineSlice {
 public:
  LineSlice(const SumNorm& N, const Vector& x, const Vector& d);
  double eval(double t) const;

 private:
  struct Affine {
    double alpha, beta, scale;
  };
  struct Spread {
    Vector base, dir;
    double scale;
  };
  struct Image {
    Vector base, dir;
    double p;
  };
  struct Radial {
    double xx, xd, dd, scale;
  };
  struct Generic {
    Index term;
  };
  using Piece = std::variant<Affine, Spread, Image, Radial, Generic>;

  const SumNorm* norm_;
  Vector x_;
  Vector d_;
  bool has_generic_ = false;
  std::vector<Piece> pieces_;
};

// Term-evaluation counter. Evaluations on worker threads are folded in when
// those threads exit, so read it after joining.
std::uint64_t term_evaluations();
void reset_term_evaluations();
void count_term_evaluations(std::uint64_t n);

}  // namespace normforge
