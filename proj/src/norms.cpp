#include "normforge/norms.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "normforge/submodular.hpp"

namespace normforge {
namespace {

std::atomic<std::uint64_t> g_evaluations{0};

struct LocalCounter {
  std::uint64_t count = 0;
  ~LocalCounter() { g_evaluations.fetch_add(count, std::memory_order_relaxed); }
};

thread_local LocalCounter t_counter;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double lp_norm(const Vector& y, double p) {
  if (y.size() == 0) return 0.0;
  if (std::isinf(p)) return y.cwiseAbs().maxCoeff();
  if (p == 1.0) return y.cwiseAbs().sum();
  if (p == 2.0) return y.norm();
  const double peak = y.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  return peak * std::pow((y.cwiseAbs() / peak).array().pow(p).sum(), 1.0 / p);
}

double power(double v, double p) {
  if (p == 1.0) return v;
  if (p == 2.0) return v * v;
  return std::pow(v, p);
}

double root(double v, double p) {
  if (p == 1.0) return v;
  if (p == 2.0) return std::sqrt(v);
  return std::pow(v, 1.0 / p);
}

void check_index(Index i, Index n, const char* what) {
  if (i < 0 || i >= n) {
    fail(ErrorKind::kDimensionMismatch,
         std::string(what) + ": vertex index " + std::to_string(i) +
             " out of range for dimension " + std::to_string(n));
  }
}

}  // namespace

std::uint64_t term_evaluations() {
  return g_evaluations.load(std::memory_order_relaxed) + t_counter.count;
}

void reset_term_evaluations() {
  g_evaluations.store(0, std::memory_order_relaxed);
  t_counter.count = 0;
}

void count_term_evaluations(std::uint64_t n) { t_counter.count += n; }

NormTerm linear(Vector a) { return LinearTerm{std::move(a)}; }

NormTerm graph_edge(Index u, Index v, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    fail(ErrorKind::kInvalidArgument, "graph_edge: weight must be finite and >= 0");
  }
  return GraphEdgeTerm{u, v, c};
}

NormTerm hyperedge(std::vector<Index> vertices, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    fail(ErrorKind::kInvalidArgument, "hyperedge: weight must be finite and >= 0");
  }
  return HyperedgeTerm{std::move(vertices), c};
}

NormTerm lp_image(Matrix rows, double p) {
  if (!(p >= 1.0)) fail(ErrorKind::kInvalidArgument, "lp_image: exponent must be >= 1");
  return LpImageTerm{std::move(rows), p};
}

NormTerm lovasz(std::shared_ptr<const SetFunction> f, double regularizer) {
  if (!f) fail(ErrorKind::kInvalidArgument, "lovasz: null set function");
  if (!(regularizer >= 0.0)) {
    fail(ErrorKind::kInvalidArgument, "lovasz: regularizer must be >= 0");
  }
  return LovaszTerm{std::move(f), regularizer};
}

NormTerm euclidean(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    fail(ErrorKind::kInvalidArgument, "euclidean: scale must be finite and >= 0");
  }
  return EuclideanTerm{t};
}

std::string term_kind(const NormTerm& term) {
  return std::visit(Overloaded{
                        [](const LinearTerm&) { return std::string("linear"); },
                        [](const GraphEdgeTerm&) { return std::string("graph_edge"); },
                        [](const HyperedgeTerm&) { return std::string("hyperedge"); },
                        [](const LpImageTerm&) { return std::string("lp_image"); },
                        [](const LovaszTerm&) { return std::string("lovasz"); },
                        [](const EuclideanTerm&) { return std::string("euclidean"); },
                    },
                    term);
}

void validate_term(const NormTerm& term, Index n) {
  std::visit(
      Overloaded{
          [&](const LinearTerm& t) {
            if (t.a.size() != n) {
              fail(ErrorKind::kDimensionMismatch, "linear term length != dim");
            }
            if (!t.a.allFinite()) fail(ErrorKind::kNonFinite, "linear term entry");
          },
          [&](const GraphEdgeTerm& t) {
            check_index(t.u, n, "graph_edge");
            check_index(t.v, n, "graph_edge");
            if (!(t.c >= 0.0) || !std::isfinite(t.c)) {
              fail(ErrorKind::kInvalidArgument, "graph_edge: weight must be >= 0");
            }
          },
          [&](const HyperedgeTerm& t) {
            for (Index v : t.vertices) check_index(v, n, "hyperedge");
            if (!(t.c >= 0.0) || !std::isfinite(t.c)) {
              fail(ErrorKind::kInvalidArgument, "hyperedge: weight must be >= 0");
            }
          },
          [&](const LpImageTerm& t) {
            if (t.rows.cols() != n) {
              fail(ErrorKind::kDimensionMismatch, "lp_image: columns != dim");
            }
            if (!t.rows.allFinite()) fail(ErrorKind::kNonFinite, "lp_image entry");
            if (!(t.p >= 1.0)) fail(ErrorKind::kInvalidArgument, "lp_image: p < 1");
          },
          [&](const LovaszTerm& t) {
            if (!t.f) fail(ErrorKind::kInvalidArgument, "lovasz: null set function");
            if (t.f->ground_size() != n) {
              fail(ErrorKind::kDimensionMismatch, "lovasz: ground set size != dim");
            }
            if (!(t.regularizer >= 0.0)) {
              fail(ErrorKind::kInvalidArgument, "lovasz: regularizer < 0");
            }
          },
          [&](const EuclideanTerm& t) {
            if (!(t.t >= 0.0) || !std::isfinite(t.t)) {
              fail(ErrorKind::kInvalidArgument, "euclidean: scale must be >= 0");
            }
          },
      },
      term);
}

double eval_term(const NormTerm& term, const Vector& x) {
  const Index n = x.size();
  require_finite(x, "eval_term");
  count_term_evaluations(1);
  return std::visit(
      Overloaded{
          [&](const LinearTerm& t) {
            if (t.a.size() != n) {
              fail(ErrorKind::kDimensionMismatch, "linear term length != dim(x)");
            }
            return std::abs(t.a.dot(x));
          },
          [&](const GraphEdgeTerm& t) {
            check_index(t.u, n, "graph_edge");
            check_index(t.v, n, "graph_edge");
            return t.c * std::abs(x(t.u) - x(t.v));
          },
          [&](const HyperedgeTerm& t) {
            if (t.vertices.size() < 2) return 0.0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (Index v : t.vertices) {
              check_index(v, n, "hyperedge");
              lo = std::min(lo, x(v));
              hi = std::max(hi, x(v));
            }
            return std::sqrt(t.c) * (hi - lo);
          },
          [&](const LpImageTerm& t) {
            if (t.rows.cols() != n) {
              fail(ErrorKind::kDimensionMismatch, "lp_image: columns != dim(x)");
            }
            return lp_norm(t.rows * x, t.p);
          },
          [&](const LovaszTerm& t) {
            double v = t.f->extension(x);
            if (t.regularizer > 0.0) v += t.regularizer * x.norm();
            return v;
          },
          [&](const EuclideanTerm& t) { return t.t * x.norm(); },
      },
      term);
}

SumNorm::SumNorm(Index dim, double p, std::vector<NormTerm> terms)
    : SumNorm(dim, p, std::move(terms), Vector()) {}

SumNorm::SumNorm(Index dim, double p, std::vector<NormTerm> terms, Vector weights)
    : dim_(dim), p_(p), terms_(std::move(terms)), weights_(std::move(weights)) {
  if (dim_ < 1) fail(ErrorKind::kInvalidArgument, "SumNorm: dimension must be >= 1");
  if (!(p_ >= 1.0) || !std::isfinite(p_)) {
    fail(ErrorKind::kInvalidArgument, "SumNorm: power p must be finite and >= 1");
  }
  const Index m = static_cast<Index>(terms_.size());
  if (weights_.size() == 0) weights_ = Vector::Ones(m);
  if (weights_.size() != m) {
    fail(ErrorKind::kDimensionMismatch, "SumNorm: weight count != term count");
  }
  if (!weights_.allFinite() || (m > 0 && weights_.minCoeff() < 0.0)) {
    fail(ErrorKind::kInvalidArgument, "SumNorm: weights must be finite and >= 0");
  }
  for (const auto& t : terms_) validate_term(t, dim_);
  origin_.resize(terms_.size());
  for (Index i = 0; i < m; ++i) origin_[static_cast<std::size_t>(i)] = i;
}

double SumNorm::term_power(Index i, const Vector& x) const {
  const double w = weights_(i);
  if (w == 0.0) return 0.0;
  return w * power(eval_term(term(i), x), p_);
}

double SumNorm::eval_power(const Vector& x) const {
  if (x.size() != dim_) {
    fail(ErrorKind::kDimensionMismatch,
         "SumNorm: dim(x) = " + std::to_string(x.size()) + ", expected " +
             std::to_string(dim_));
  }
  require_finite(x, "SumNorm");
  double total = 0.0;
  for (Index i = 0; i < size(); ++i) total += term_power(i, x);
  return total;
}

double SumNorm::eval(const Vector& x) const { return root(eval_power(x), p_); }

SumNorm SumNorm::with_term(NormTerm term, double weight) const {
  std::vector<NormTerm> terms = terms_;
  terms.push_back(std::move(term));
  Vector w(weights_.size() + 1);
  w << weights_, weight;
  SumNorm out(dim_, p_, std::move(terms), std::move(w));
  return out;
}

SumNorm SumNorm::scaled(double c) const {
  if (!(c >= 0.0)) fail(ErrorKind::kInvalidArgument, "SumNorm::scaled: c < 0");
  SumNorm out = *this;
  out.weights_ *= power(c, p_);
  return out;
}

double eval_sum(const SumNorm& N, const Vector& x) { return N.eval(x); }

SumNorm apply_weights(const SumNorm& N, const Vector& w) {
  if (w.size() != N.size()) {
    fail(ErrorKind::kDimensionMismatch, "apply_weights: weight length != term count");
  }
  if (!w.allFinite() || (w.size() > 0 && w.minCoeff() < 0.0)) {
    fail(ErrorKind::kInvalidArgument, "apply_weights: negative or non-finite weight");
  }
  std::vector<NormTerm> kept;
  std::vector<Index> origin;
  std::vector<double> weights;
  for (Index i = 0; i < N.size(); ++i) {
    if (w(i) > 0.0) {
      kept.push_back(N.term(i));
      origin.push_back(i);
      weights.push_back(w(i) * N.weights()(i));
    }
  }
  SumNorm out(N.dim(), N.p(), std::move(kept),
              Eigen::Map<Vector>(weights.data(), static_cast<Index>(weights.size())));
  out.origin_ = std::move(origin);
  return out;
}

LineSlice::LineSlice(const SumNorm& N, const Vector& x, const Vector& d)
    : norm_(&N), x_(x), d_(d) {
  if (x.size() != N.dim() || d.size() != N.dim()) {
    fail(ErrorKind::kDimensionMismatch, "LineSlice: dimension mismatch");
  }
  pieces_.reserve(static_cast<std::size_t>(N.size()));
  for (Index i = 0; i < N.size(); ++i) {
    const NormTerm& term = N.term(i);
    Piece piece = std::visit(
        Overloaded{
            [&](const LinearTerm& t) -> Piece { return Affine{t.a.dot(x), t.a.dot(d), 1.0}; },
            [&](const GraphEdgeTerm& t) -> Piece {
              return Affine{x(t.u) - x(t.v), d(t.u) - d(t.v), t.c};
            },
            [&](const HyperedgeTerm& t) -> Piece {
              Spread s{Vector(static_cast<Index>(t.vertices.size())),
                       Vector(static_cast<Index>(t.vertices.size())), std::sqrt(t.c)};
              for (std::size_t j = 0; j < t.vertices.size(); ++j) {
                s.base(static_cast<Index>(j)) = x(t.vertices[j]);
                s.dir(static_cast<Index>(j)) = d(t.vertices[j]);
              }
              return s;
            },
            [&](const LpImageTerm& t) -> Piece {
              return Image{t.rows * x, t.rows * d, t.p};
            },
            [&](const LovaszTerm&) -> Piece { return Generic{i}; },
            [&](const EuclideanTerm& t) -> Piece {
              return Radial{x.squaredNorm(), x.dot(d), d.squaredNorm(), t.t};
            },
        },
        term);
    if (std::holds_alternative<Generic>(piece)) has_generic_ = true;
    pieces_.push_back(std::move(piece));
  }
}

double LineSlice::eval(double t) const {
  const double p = norm_->p();
  const Vector& w = norm_->weights();
  Vector point;
  if (has_generic_) point = x_ + t * d_;
  double total = 0.0;
  std::uint64_t direct = 0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double wi = w(static_cast<Index>(i));
    if (wi == 0.0) continue;
    if (!std::holds_alternative<Generic>(pieces_[i])) ++direct;
    const double v = std::visit(
        Overloaded{
            [&](const Affine& a) { return a.scale * std::abs(a.alpha + t * a.beta); },
            [&](const Spread& s) {
              double lo = std::numeric_limits<double>::infinity();
              double hi = -lo;
              for (Index j = 0; j < s.base.size(); ++j) {
                const double v = s.base(j) + t * s.dir(j);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
              }
              return s.base.size() < 2 ? 0.0 : s.scale * (hi - lo);
            },
            [&](const Image& im) { return lp_norm(im.base + t * im.dir, im.p); },
            [&](const Radial& r) {
              return r.scale * std::sqrt(std::max(0.0, r.xx + 2.0 * t * r.xd + t * t * r.dd));
            },
            [&](const Generic& g) { return eval_term(norm_->term(g.term), point); },
        },
        pieces_[i]);
    total += wi * power(v, p);
  }
  count_term_evaluations(direct);
  return root(total, p);
}

}  // namespace normforge
