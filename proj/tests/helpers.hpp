#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "normforge/norms.hpp"
#include "normforge/rng.hpp"
#include "normforge/submodular.hpp"

namespace nf_test {

using normforge::Index;
using normforge::Matrix;
using normforge::Vector;

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  normforge::Rng rng(seed);
  std::normal_distribution<double> g;
  Matrix A(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) A(i, j) = g(rng);
  return A;
}

inline std::vector<std::tuple<Index, Index, double>> complete_graph(Index n) {
  std::vector<std::tuple<Index, Index, double>> edges;
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v) edges.emplace_back(u, v, 1.0);
  return edges;
}

inline normforge::SumNorm graph_norm(Index n, const std::vector<std::tuple<Index, Index, double>>& edges,
                                     double p = 1.0) {
  std::vector<normforge::NormTerm> terms;
  for (const auto& [u, v, c] : edges) terms.push_back(normforge::graph_edge(u, v, c));
  return normforge::SumNorm(n, p, std::move(terms));
}

inline normforge::SumNorm linear_norm(const Matrix& A, double p) {
  std::vector<normforge::NormTerm> terms;
  for (Index i = 0; i < A.rows(); ++i) terms.push_back(normforge::linear(A.row(i).transpose()));
  return normforge::SumNorm(A.cols(), p, std::move(terms));
}

// Brute force over every subset S of V: max |F(S) - Ftilde(S)| / F(S) for a
// weighted edge list, with the cut value summed edge by edge.
inline double brute_force_cut_error(Index n, const std::vector<std::tuple<Index, Index, double>>& edges,
                                    const Vector& w) {
  double worst = 0.0;
  for (std::uint64_t S = 1; S + 1 < (std::uint64_t{1} << n); ++S) {
    double F = 0.0, Ft = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto& [u, v, c] = edges[e];
      if (((S >> u) & 1U) != ((S >> v) & 1U)) {
        F += c;
        Ft += w(static_cast<Index>(e)) * c;
      }
    }
    if (F > 0.0) worst = std::max(worst, std::abs(F - Ft) / F);
  }
  return worst;
}

// Leverage scores a_i^T (A^T A)^{-1} a_i through an LU inverse.
inline Vector leverage_oracle(const Matrix& A) {
  const Matrix inv = (A.transpose() * A).fullPivLu().inverse();
  Vector lev(A.rows());
  for (Index i = 0; i < A.rows(); ++i) lev(i) = A.row(i) * inv * A.row(i).transpose();
  return lev;
}

// Kolmogorov-Smirnov distance between a sample and a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double k = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = cdf(xs[i]);
    d = std::max({d, std::abs(F - static_cast<double>(i) / k), std::abs(static_cast<double>(i + 1) / k - F)});
  }
  return d;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("normforge_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace nf_test
