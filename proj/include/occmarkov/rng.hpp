#pragma once

#include "occmarkov/types.hpp"

#include <cmath>
#include <cstdint>

namespace occmarkov {

// Minimal PCG32 generator (XSH-RR output on an LCG). Seed and stream select
// independent sequences, so replicate and chain substreams never collide.
class Pcg32 {
 public:
  using result_type = std::uint32_t;

  explicit Pcg32(std::uint64_t seed = 0x853c49e6748fea9bULL,
                 std::uint64_t stream = 0xda3e39cb94b95bdbULL) {
    state_ = 0;
    inc_ = (stream << 1u) | 1u;
    (*this)();
    state_ += seed;
    (*this)();
  }

  result_type operator()() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((0u - rot) & 31u));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xffffffffu; }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

// Bit-mixing finaliser used to derive well-separated substream keys.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag));
}

// Generator for a tagged substream of a master seed. Both the state seed and
// the stream selector depend on the tag, so substreams stay decorrelated.
inline Pcg32 substream(std::uint64_t seed, std::uint64_t tag) {
  return Pcg32(derive_stream(seed, tag), tag);
}

inline std::uint64_t next_u64(Pcg32& rng) {
  std::uint64_t hi = rng();
  return (hi << 32) | rng();
}

// Uniform draw on [0, 1) with 53 random bits.
inline double uniform01(Pcg32& rng) {
  return static_cast<double>(next_u64(rng) >> 11) * 0x1.0p-53;
}

inline double uniform(Pcg32& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline bool bernoulli(Pcg32& rng, double p) { return uniform01(rng) < p; }

// Standard normal via the Marsaglia polar method; the second variate of each
// accepted pair is discarded so draws stay stateless.
inline double normal01(Pcg32& rng) {
  for (;;) {
    double v1 = uniform(rng, -1.0, 1.0);
    double v2 = uniform(rng, -1.0, 1.0);
    double s = v1 * v1 + v2 * v2;
    if (s > 0.0 && s < 1.0) return v1 * std::sqrt(-2.0 * std::log(s) / s);
  }
}

// Marsaglia-Tsang squeeze for Gamma(shape, 1), boosted for shape < 1.
inline double gamma_draw(Pcg32& rng, double shape) {
  if (!(shape > 0.0)) fail(Errc::InvalidArgument, "gamma shape must be positive");
  if (shape < 1.0) {
    double u = 1.0 - uniform01(rng);  // (0, 1]
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal01(rng);
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = 1.0 - uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double beta_draw(Pcg32& rng, double a, double b) {
  double x = gamma_draw(rng, a);
  double y = gamma_draw(rng, b);
  double s = x + y;
  return s > 0.0 ? x / s : 0.5;
}

inline Vector dirichlet_draw(Pcg32& rng, const Vector& alpha) {
  Vector out(alpha.size());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) out(k) = gamma_draw(rng, alpha(k));
  double s = out.sum();
  if (s > 0.0) return out / s;
  return Vector::Constant(alpha.size(), 1.0 / static_cast<double>(alpha.size()));
}

// Index in 0..n-1 drawn proportional to nonnegative weights.
inline int categorical_draw(Pcg32& rng, const Vector& weights) {
  double total = weights.sum();
  if (!(total > 0.0) || !weights.allFinite())
    fail(Errc::AllZeroWeights, "categorical weights sum to zero");
  double u = uniform01(rng) * total;
  double acc = 0.0;
  Eigen::Index last = weights.size() - 1;
  for (Eigen::Index k = 0; k < last; ++k) {
    acc += weights(k);
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(last);
}

// State label in 1..S drawn proportional to weights.
inline int draw_state(Pcg32& rng, const Vector& weights) {
  return categorical_draw(rng, weights) + 1;
}

}  // namespace occmarkov
