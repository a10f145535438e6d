#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "normforge/common.hpp"
#include "normforge/norms.hpp"
#include "normforge/rng.hpp"
#include "normforge/sparsify.hpp"

namespace normforge {

struct SetFunctionFlags {
  bool symmetric = false;
  bool normalized_empty = true;
};

/// f : 2^V -> R_+ with V = {0, ..., n-1}. Subsets are passed as index lists
/// (order irrelevant). value() must be deterministic and safe to call
/// concurrently.
class SetFunction {
 public:
  SetFunction(Index n, SetFunctionFlags flags) : n_(n), flags_(flags) {}
  virtual ~SetFunction() = default;

  Index ground_size() const { return n_; }
  SetFunctionFlags flags() const { return flags_; }

  virtual double value(std::span<const Index> subset) const = 0;

  /// fbar(x). The default runs lovasz_extension; subclasses with a closed
  /// form may override it.
  virtual double extension(const Vector& x) const;

  /// Bitmask convenience for n <= 62.
  double value_mask(std::uint64_t mask) const;

 private:
  Index n_;
  SetFunctionFlags flags_;
};

class LambdaSetFunction final : public SetFunction {
 public:
  using Oracle = std::function<double(std::span<const Index>)>;

  LambdaSetFunction(Index n, SetFunctionFlags flags, Oracle oracle)
      : SetFunction(n, flags), oracle_(std::move(oracle)) {}

  double value(std::span<const Index> subset) const override {
    return oracle_(subset);
  }

 private:
  Oracle oracle_;
};

/// Weighted cut function of a graph or hypergraph: a component (edge or
/// hyperedge) contributes its weight when the subset splits it.
class CutFunction final : public SetFunction {
 public:
  struct Component {
    std::vector<Index> vertices;
    double weight = 1.0;
  };

  CutFunction(Index n, std::vector<Component> components);

  static CutFunction from_edges(
      Index n, const std::vector<std::tuple<Index, Index, double>>& edges);

  Index component_count() const { return static_cast<Index>(components_.size()); }
  const std::vector<Component>& components() const { return components_; }

  double value(std::span<const Index> subset) const override;
  /// sum_i weight_i (max_{v in e_i} x_v - min_{v in e_i} x_v)
  double extension(const Vector& x) const override;

  /// f_i(S) for membership indicator `in_set` (size n).
  double component_value(Index i, const std::vector<char>& in_set) const;
  double value(const std::vector<char>& in_set) const;

  /// The single-component cut function f_i.
  std::shared_ptr<const CutFunction> component_function(Index i) const;

 private:
  std::vector<Component> components_;
};

/// Cut function whose component i is w_i N_i(1_S)^p for each graph_edge or
/// hyperedge term of N. Throws on any other term kind.
CutFunction cut_function_from(const SumNorm& N);

/// fbar(x) = integral of f({i : x_i <= t}) dt, evaluated with exactly n + 1
/// oracle calls on the prefixes of a stable ascending sort of x.
double lovasz_extension(const SetFunction& f, const Vector& x);

struct SetFunctionCheck {
  bool empty_is_zero = true;
  bool symmetric = true;
  bool submodular = true;
  Index trials = 0;
};

/// Spot-checks f(empty) = 0, symmetry and diminishing returns on random
/// subsets.
SetFunctionCheck check_set_function(const SetFunction& f, Index trials, Rng& rng);

struct SfmOptions {
  SparsifyConfig config;
  /// Bound on max_S f_i(S); computed by enumeration when zero and n <= 20.
  double max_value = 0.0;
  int max_attempts = 8;
};

struct SfmResult {
  Vector weights;
  double weight_sum = 0.0;
  int attempts = 0;
  bool below_min_epsilon = false;
  SparsifierResult last;
};

/// Sparsifies F = f_1 + ... + f_m for symmetric submodular f_i through the
/// homotopy driver on fbar_i + m^-5 ||x||_2, retrying with a fresh seed
/// while sum_i w_i > 2m.
SfmResult sfm_sparsify(const std::vector<std::shared_ptr<const SetFunction>>& fs,
                       double epsilon, const SfmOptions& options);

}  // namespace normforge
