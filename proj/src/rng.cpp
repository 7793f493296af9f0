#include "betamix/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace betamix {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3) {
  std::uint64_t s = mix(seed + kGamma);
  s = mix(s ^ (k1 + kGamma));
  s = mix(s ^ (k2 + kGamma));
  s = mix(s ^ (k3 + kGamma));
  state_ = s;
}

std::uint64_t RngStream::next_u64() {
  state_ += kGamma;
  return mix(state_);
}

double RngStream::next_unit() {
  // 53 random bits, offset by half an ulp so the result is never 0 or 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
}

double RngStream::next_normal() {
  const double u1 = next_unit();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double RngStream::next_gamma(double shape) {
  if (!(shape > 0.0)) throw std::domain_error("next_gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost trick: G(a) = G(a+1) * U^{1/a}.
    return next_gamma(shape + 1.0) * std::pow(next_unit(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_unit();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::next_beta(double alpha, double delta) {
  const double g1 = next_gamma(alpha);
  const double g2 = next_gamma(delta);
  return g1 / (g1 + g2);
}

}  // namespace betamix
