#include <doctest.h>

#include "helpers.hpp"
#include "normforge/sparsify.hpp"
#include "normforge/verify.hpp"

using namespace normforge;
using nf_test::random_matrix;

TEST_SUITE("sparsify") {
  TEST_CASE("choose_M scaling") {
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
      CAPTURE(p);
      const Index m1 = choose_M(10, 0.2, p, 0.5);
      CHECK(choose_M(10, 0.1, p, 0.5) >= 4 * m1 - 4);
      const Index doubled = choose_M(10, 0.2, p, 1.0);
      CHECK(std::abs(doubled - 2 * m1) <= 2);
    }
    const Index one = choose_M(1, 0.5, 1.0, 0.5);
    CHECK(one >= 1);
    CHECK(one < 1000);
    CHECK_THROWS_AS(choose_M(5, 1.5, 1.0, 0.5), Error);
    CHECK_THROWS_AS(choose_M(5, 0.5, 1.0, 0.0), Error);
  }

  TEST_CASE("choose_M formula at p = 1") {
    const double n = 12.0, eps = 0.3, L = std::log(12.0);
    const double expected = 0.5 * n * std::log(n / eps) * std::sqrt(L) * L * L / (eps * eps);
    CHECK(choose_M(12, eps, 1.0, 0.5) == static_cast<Index>(std::ceil(expected)));
  }

  TEST_CASE("sample_support basics") {
    Rng rng(80);
    const SparsifierResult one = sample_support(ProbabilityVector{Vector::Ones(1)}, 37, rng);
    CHECK(one.weights(0) == 1.0);
    const SparsifierResult half = sample_support(ProbabilityVector{Vector::Constant(2, 0.5)}, 100000, rng);
    CHECK(half.weights(0) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(half.weights(1) == doctest::Approx(1.0).epsilon(0.05));

    const ProbabilityVector rho = to_probabilities(Vector{{0.1, 0.5, 0.05, 2.0, 0.3}});
    const SparsifierResult r = sample_support(rho, 3, rng);
    CHECK(r.support.size() <= 3);
    CHECK(r.counts.sum() == 3.0);
    CHECK((r.weights.array() * rho.rho.array()).sum() * 3.0 == doctest::Approx(3.0).epsilon(1e-12));
    Rng a(81), b(81);
    CHECK(sample_support(rho, 50, a).weights == sample_support(rho, 50, b).weights);
  }

  TEST_CASE("sparsify_once on a single term is exact") {
    const SumNorm N(3, 1.0, {euclidean(2.0)});
    SparsifyConfig cfg;
    const SampleBatch b = sample_euclidean_mu(3, 2.0, 1.0, 50, 82);
    const SparsifierResult r = sparsify_once(N, b, cfg);
    CHECK(r.weights(0) == 1.0);
  }

  TEST_CASE("sparsify_once evaluates each term once per sample") {
    const SumNorm N = nf_test::linear_norm(random_matrix(13, 4, 83), 1.0);
    const SampleBatch b = sample_euclidean_mu(4, 1.0, 1.0, 77, 84);
    SparsifyConfig cfg;
    reset_term_evaluations();
    sparsify_once(N, b, cfg);
    CHECK(term_evaluations() == 77u * 13u);
  }

  TEST_CASE("leverage sampling of an l2 instance") {
    const Matrix A = random_matrix(20, 3, 85);
    SparsifyConfig cfg;
    cfg.epsilon = 0.5;
    cfg.p = 2.0;
    cfg.seed = 86;
    const SparsifierResult r = sparsify_with_probabilities(exact_leverage_probs(A), 3, cfg);
    const Matrix G = A.transpose() * A;
    const Matrix Gt = A.transpose() * r.weights.asDiagonal() * A;
    Rng rng(87);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const Vector x = gaussian_vector(3, rng);
      const double q = x.dot(G * x);
      worst = std::max(worst, std::abs(x.dot(Gt * x) - q) / q);
    }
    CHECK(worst <= 0.5);
  }

  TEST_CASE("homotopy on a single Euclidean term") {
    const SumNorm N(4, 1.0, {euclidean(3.0)});
    SparsifyConfig cfg;
    cfg.seed = 88;
    const SparsifierResult r = homotopy_sparsify(N, 3.0, 3.0, 0.25, cfg);
    REQUIRE(r.weights.size() == 1);
    CHECK(r.weights(0) >= 0.75);
    CHECK(r.weights(0) <= 1.25);
    CHECK(static_cast<double>(r.stage_log.size()) <= std::ceil(std::log2(1.0 / 0.25)) + 2.0);
  }

  TEST_CASE("homotopy on the path P4 meets its accuracy on every cut") {
    const auto edges = std::vector<std::tuple<Index, Index, double>>{{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}};
    const SumNorm N = nf_test::graph_norm(4, edges);
    // On the complement of the constants, sum |x_i - x_{i+1}| >= sqrt(lambda_2) ||x||
    // with lambda_2 = 2 - 2 cos(pi / 4) the Fiedler value of P4.
    const double r = std::sqrt(2.0 - 2.0 * std::cos(M_PI / 4.0));
    const double R = 3.0 * std::sqrt(2.0);
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      SparsifyConfig cfg;
      cfg.seed = seed;
      const SparsifierResult res = homotopy_sparsify(N, r, R, 0.5, cfg);
      CHECK(static_cast<double>(res.stage_log.size()) <= std::ceil(std::log2(R / (0.5 * r))) + 2.0);
      CHECK(res.support.size() <= static_cast<std::size_t>(res.M));
      if (nf_test::brute_force_cut_error(4, edges, res.weights) <= 0.5) ++good;
    }
    CHECK(good >= 2);
  }

  TEST_CASE("homotopy stage evaluation counts follow the configuration") {
    const auto edges = nf_test::complete_graph(4);
    const SumNorm N = nf_test::graph_norm(4, edges);
    SparsifyConfig cfg;
    cfg.seed = 89;
    reset_term_evaluations();
    const SparsifierResult res = homotopy_sparsify(N, 2.0, 6.0 * std::sqrt(2.0), 0.5, cfg);
    const StageRecord& first = res.stage_log.front();
    // Stage 0 samples exactly (no walk): k_tau (m + 1) tau evaluations plus the
    // equivalence probes, each costing m + 1 terms for N_R and |support| for the
    // sparsified copy.
    const Index k = tau_sample_count(4, 7);
    const Index probes = cfg.equivalence_probes + std::min<Index>(k, 256);
    CHECK(first.evaluations == static_cast<std::uint64_t>(k * 7 + probes * (7 + first.support)));
    std::uint64_t staged = 0;
    for (const StageRecord& s : res.stage_log) staged += s.evaluations;
    CHECK(staged == term_evaluations());
  }

  TEST_CASE("p = 2 orthonormal terms: uniform probabilities, accurate result") {
    const SumNorm N = nf_test::linear_norm(Matrix::Identity(4, 4), 2.0);
    SparsifyConfig cfg;
    cfg.seed = 90;
    cfg.epsilon = 0.5;
    const SparsifierResult r = sparsify_p_power(N, cfg);
    for (Index i = 0; i < 4; ++i) CHECK(r.rho(i) == doctest::Approx(0.25).epsilon(0.3));
    ProbeOptions po;
    po.epsilon = 0.5;
    CHECK(empirical_eps(N, apply_weights(N, r.weights), po).pass);
    CHECK(r.smoothness_proxy > 0.0);
  }

  TEST_CASE("p = 2 Monte Carlo probabilities track exact leverage") {
    const Matrix A = random_matrix(30, 4, 91);
    const SumNorm N = nf_test::linear_norm(A, 2.0);
    SparsifyConfig cfg;
    cfg.seed = 92;
    const SparsifierResult r = sparsify_p_power(N, cfg);
    const ProbabilityVector exact = exact_leverage_probs(A);
    for (Index i = 0; i < 30; ++i) {
      CHECK(r.rho(i) / exact[i] >= 0.5);
      CHECK(r.rho(i) / exact[i] <= 2.0);
    }
  }

  TEST_CASE("p = 4 with equal terms: uniform rho and sum of weights m") {
    const Index m = 6;
    std::vector<NormTerm> terms(m, lp_image(Matrix::Identity(3, 3), 4.0));
    const SumNorm N(3, 4.0, terms);
    SparsifyConfig cfg;
    cfg.seed = 93;
    const SparsifierResult r = sparsify_p_power(N, cfg);
    for (Index i = 0; i < m; ++i) CHECK(r.rho(i) == doctest::Approx(1.0 / m).epsilon(1e-12));
    CHECK(r.weights.sum() == doctest::Approx(static_cast<double>(m)).epsilon(1e-12));
    CHECK(r.warnings.empty());
  }

  TEST_CASE("p = 4 default surrogate warns when the norm is far from Euclidean") {
    Matrix A = Matrix::Identity(3, 3);
    A(0, 0) = 50.0;
    const SumNorm N(3, 4.0, {linear(A.row(0).transpose()), linear(A.row(1).transpose()), linear(A.row(2).transpose())});
    SparsifyConfig cfg;
    cfg.seed = 94;
    const SparsifierResult r = sparsify_p_power(N, cfg);
    REQUIRE_FALSE(r.warnings.empty());
    CHECK(r.equivalence_ratio > cfg.surrogate_warn_ratio);
  }

  TEST_CASE("p = 4 with a supplied surrogate") {
    const Matrix A = random_matrix(12, 3, 95);
    const SumNorm N = nf_test::linear_norm(A, 4.0);
    SparsifyConfig cfg;
    cfg.seed = 96;
    cfg.surrogate = SumNorm(3, 2.0, {lp_image(A, 2.0)});
    const SparsifierResult r = sparsify_p_power(N, cfg);
    CHECK(r.weights.size() == 12);
    CHECK(r.support.size() <= 12);
    CHECK(r.equivalence_ratio < 4.0);
  }

  TEST_CASE("scale equivariance") {
    const Matrix A = random_matrix(10, 3, 97);
    const SumNorm N(3, 1.0, {lp_image(A.topRows(4), 1.0), lp_image(A.middleRows(4, 3), 2.0),
                             lp_image(A.bottomRows(3), 1.0), euclidean(0.5)});
    SparsifyConfig cfg;
    cfg.seed = 98;
    cfg.rounding = Rounding{0.5, 20.0};
    const SparsifierResult a = sparsify_p_power(N, cfg);
    cfg.rounding = Rounding{5.0, 200.0};
    const SparsifierResult b = sparsify_p_power(N.scaled(10.0), cfg);
    REQUIRE(a.weights.size() == b.weights.size());
    for (Index i = 0; i < a.weights.size(); ++i) CHECK(b.weights(i) == doctest::Approx(a.weights(i)).epsilon(1e-9));
  }

  TEST_CASE("unbiasedness of the estimator") {
    const Matrix A = random_matrix(15, 3, 99);
    const SumNorm N = nf_test::linear_norm(A, 1.0);
    Vector tau(15);
    for (Index i = 0; i < 15; ++i) tau(i) = 0.2 + std::abs(A(i, 0));
    const ProbabilityVector rho = to_probabilities(tau);
    Rng prng(100);
    for (int probe = 0; probe < 3; ++probe) {
      const Vector x = gaussian_vector(3, prng);
      std::vector<double> vals;
      for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(derive_seed(101, "unbiased", seed));
        const SparsifierResult r = sample_support(rho, 100, rng);
        vals.push_back(apply_weights(N, r.weights).eval_power(x));
      }
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= 200.0;
      double var = 0.0;
      for (double v : vals) var += (v - mean) * (v - mean);
      const double se = std::sqrt(var / 199.0 / 200.0);
      CHECK(std::abs(mean - N.eval_power(x)) <= 3.0 * se);
    }
  }

  TEST_CASE("config validation") {
    SparsifyConfig cfg;
    cfg.epsilon = 1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.epsilon = 0.5;
    cfg.C_M = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    const SumNorm N(2, 3.0, {euclidean(1.0)});
    CHECK_THROWS_AS(homotopy_sparsify(N, 1.0, 1.0, 0.5, SparsifyConfig{}), Error);
    const SumNorm K(2, 1.0, {euclidean(1.0)});
    CHECK_THROWS_AS(homotopy_sparsify(K, 2.0, 1.0, 0.5, SparsifyConfig{}), Error);
  }

  TEST_CASE("determinism") {
    const SumNorm N = nf_test::graph_norm(4, nf_test::complete_graph(4));
    SparsifyConfig cfg;
    cfg.seed = 102;
    const SparsifierResult a = homotopy_sparsify(N, 2.0, 6.0 * std::sqrt(2.0), 0.5, cfg);
    cfg.sampler.threads = 3;
    const SparsifierResult b = homotopy_sparsify(N, 2.0, 6.0 * std::sqrt(2.0), 0.5, cfg);
    CHECK(a.weights == b.weights);
    CHECK(a.M == b.M);
  }
}
