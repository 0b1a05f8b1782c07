#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace epibda {

/// One stream per chain. Every sampler in the library takes this by reference
/// and draws from it in a fixed order, so a seed reproduces a run exactly.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

/// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  // 53 random bits, shifted half a step off zero
  const auto bits = rng() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) { return -std::log(uniform_open(rng)) / rate; }

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

/// Gamma(shape, rate). Draws that underflow are clamped to the smallest
/// normal double so rate parameters stay strictly positive.
inline double gamma_rate(Rng& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gamma_rate: shape and rate must be positive");
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  const double x = dist(rng);
  return x > 0.0 ? x : std::numeric_limits<double>::min();
}

inline double beta_draw(Rng& rng, double a, double b) {
  const double x = gamma_rate(rng, a, 1.0);
  const double y = gamma_rate(rng, b, 1.0);
  return x / (x + y);
}

inline std::vector<double> dirichlet(Rng& rng, std::span<const double> alpha) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = gamma_rate(rng, alpha[i], 1.0);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

inline int binomial(Rng& rng, int n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<int> dist(n, p);
  return dist(rng);
}

/// Index drawn with probability proportional to `weights` (nonnegative, not
/// necessarily normalized). Returns -1 when the total mass is zero.
inline int categorical(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) return -1;
  const double u = uniform_open(rng) * total;
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = static_cast<int>(i);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

inline std::vector<int> multinomial(Rng& rng, int n, std::span<const double> probs) {
  std::vector<int> out(probs.size(), 0);
  double remaining_mass = 1.0;
  int remaining = n;
  for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    const double p = remaining_mass > 0.0 ? std::clamp(probs[i] / remaining_mass, 0.0, 1.0) : 0.0;
    out[i] = binomial(rng, remaining, p);
    remaining -= out[i];
    remaining_mass -= probs[i];
  }
  if (!probs.empty()) out.back() += remaining;
  return out;
}

}  // namespace epibda
