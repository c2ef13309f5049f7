#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace rcast {

/// Identifies one reproducible random sequence. Streams with the same
/// (base_seed, stream_id) produce identical draws.
struct RngStream {
  std::uint64_t base_seed = 0;
  std::uint64_t stream_id = 0;

  /// Derived stream for retries / sub-tasks that must not overlap the parent.
  RngStream substream(std::uint64_t k) const {
    return {base_seed, mix(stream_id ^ mix(k + 0x632be59bd9b4e019ULL))};
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t engine_seed() const { return mix(base_seed ^ mix(stream_id)); }
};

/// Stream identifiers for the different consumers of randomness. Keeping
/// them in one place guarantees that no two consumers share a sequence.
namespace stream_ids {
inline constexpr std::uint64_t reservoir(std::uint64_t member, std::uint64_t layer = 1) {
  return layer <= 1 ? member : ((layer - 1) << 40) | member;
}
inline constexpr std::uint64_t forecast_noise = 0x0f0000000000ULL;
inline constexpr std::uint64_t gibbs = 0x0e0000000000ULL;
inline constexpr std::uint64_t genetic = 0x0d0000000000ULL;
inline constexpr std::uint64_t simulate = 0x0c0000000000ULL;
inline constexpr std::uint64_t sampling = 0x0b0000000000ULL;
}  // namespace stream_ids

/// Generator over a stream: uniforms from mt19937_64 (fully specified by the
/// standard), normals by Box-Muller, gammas by Marsaglia-Tsang. Everything is
/// a deterministic transform of the engine output, so sequences are portable.
class Rng {
 public:
  explicit Rng(RngStream s) : engine_(s.engine_seed()) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    auto v = lo + static_cast<std::int64_t>(std::floor(uniform() * span));
    return v > hi ? hi : v;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Gamma(shape, scale = 1).
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// InverseGamma(shape, scale): density ∝ x^{-shape-1} exp(-scale/x).
  double inverse_gamma(double shape, double scale) { return scale / gamma(shape); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rcast
