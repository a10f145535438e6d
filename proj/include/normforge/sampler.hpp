#pragma once

#include <cstdint>

#include "normforge/common.hpp"
#include "normforge/norms.hpp"
#include "normforge/rng.hpp"

namespace normforge {

/// A sum norm together with declared bounds r ||x||_2 <= N(x) <= R ||x||_2.
/// Construction spot-checks the bounds on random unit vectors.
class RoundedNorm {
 public:
  RoundedNorm(SumNorm norm, double r, double R, Index spot_checks = 64);

  const SumNorm& norm() const { return norm_; }
  double r() const { return r_; }
  double R() const { return R_; }

 private:
  SumNorm norm_;
  double r_;
  double R_;
};

/// Probed estimate of (min, max) of N(x)/||x||_2 over random directions.
std::pair<double, double> probe_rounding(const SumNorm& N, Index probes,
                                         std::uint64_t seed);

/// Zero counts mean "pick the default for the dimension" (see resolved()).
struct SamplerConfig {
  Index burn_in = 0;           // default 50 n^2
  Index steps_per_sample = 0;  // default 10 n
  double chord_tol = 1e-9;
  std::uint64_t seed = 1;
  Index chains = 4;
  Index threads = 0;  // 0: hardware concurrency

  SamplerConfig resolved(Index n) const;
  void validate() const;
};

struct WalkDiagnostics {
  Index steps = 0;
  Index chord_evaluations = 0;
  double max_boundary_excess = 0.0;
};

enum class SampleLaw { kUniformBall, kExpPower };

/// Points stored column-wise (n x k).
struct SampleBatch {
  Matrix points;
  SampleLaw law = SampleLaw::kUniformBall;
  double phat = 0.0;
  SamplerConfig config;
  WalkDiagnostics diagnostics;

  Index dim() const { return points.rows(); }
  Index count() const { return points.cols(); }
};

struct Chord {
  double lower = 0.0;
  double upper = 0.0;
  Index evaluations = 0;
};

/// Endpoints t- < 0 < t+ of the chord of B_N through x along d, each with
/// |N(x + t d) - 1| <= tol. Requires N(x) < 1 and N(d) > 0.
Chord chord_endpoints(const SumNorm& N, const Vector& x, const Vector& d,
                      double tol);

/// Hit-and-run targeting the uniform measure on B_N.
SampleBatch uniform_ball_walk(const RoundedNorm& N, Index k,
                              const SamplerConfig& cfg);

/// Maps a uniform-on-B_N batch to density proportional to exp(-N(x)^phat):
/// X -> u^(1/phat) X / N(X) with u ~ Gamma(n/phat, 1).
SampleBatch radial_resample(const SampleBatch& batch, const SumNorm& N,
                            double phat, Rng& rng);

/// uniform_ball_walk followed by radial_resample.
SampleBatch sample_mu(const RoundedNorm& N, double phat, Index k,
                      const SamplerConfig& cfg);

/// Exact draw from density proportional to exp(-(scale ||x||_2)^phat).
SampleBatch sample_euclidean_mu(Index n, double scale, double phat, Index k,
                                std::uint64_t seed);

struct MomentCheck {
  double mean = 0.0;
  double expected = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

/// (1/k) sum_j N(Z_j)^phat against n/phat with band 4 sqrt(n/k) relative.
MomentCheck mean_power_check(const SumNorm& N, const SampleBatch& batch);

}  // namespace normforge
