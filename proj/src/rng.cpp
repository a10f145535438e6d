#include "normforge/rng.hpp"

namespace normforge {

std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  // FNV-1a over the stream name, then mixed with the parent seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return mix_seed(seed ^ mix_seed(h));
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name,
                          std::uint64_t index) {
  return mix_seed(derive_seed(seed, name) + index * 0x9e3779b97f4a7c15ULL);
}

Vector gaussian_vector(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector g(n);
  for (Index i = 0; i < n; ++i) g(i) = normal(rng);
  return g;
}

Vector unit_direction(Index n, Rng& rng) {
  for (;;) {
    Vector g = gaussian_vector(n, rng);
    const double len = g.norm();
    if (len > 1e-300) return g / len;
  }
}

}  // namespace normforge
