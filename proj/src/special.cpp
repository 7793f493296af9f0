#include "betamix/special.hpp"

#include <cmath>

namespace betamix {

namespace {

// Lanczos coefficients, g = 7, n = 9 (Godfrey's tabulation).
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

constexpr double kHalfLogTwoPi = 0.91893853320467274178;

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  if (x < 0.5) {
    // Reflection keeps the series argument away from zero.
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double series = kLanczos[0];
  for (int i = 1; i < 9; ++i) series += kLanczos[i] / (z + i);
  const double t = z + kLanczosG + 0.5;
  return kHalfLogTwoPi + (z + 0.5) * std::log(t) - t + std::log(series);
}

double log_beta_fn(double alpha, double delta) {
  if (!(alpha > 0.0) || !(delta > 0.0))
    throw std::domain_error("log_beta_fn: shapes must be positive");
  return log_gamma(alpha) + log_gamma(delta) - log_gamma(alpha + delta);
}

double beta_log_pdf(double x, const ShapePair& shape) {
  if (!(x > 0.0) || !(x < 1.0))
    throw std::domain_error("beta_log_pdf: x must lie in (0,1)");
  return (shape.alpha - 1.0) * std::log(x) + (shape.delta - 1.0) * std::log1p(-x) -
         log_beta_fn(shape.alpha, shape.delta);
}

double digamma_lb(double y) {
  if (!(y > 0.5)) throw std::domain_error("digamma_lb: argument must exceed 1/2");
  return std::log(y - 0.5);
}

double digamma_exact(double y) {
  if (!(y > 0.0)) throw std::domain_error("digamma_exact: argument must be positive");
  double acc = 0.0;
  // Shift into the asymptotic regime: psi(y) = psi(y+1) - 1/y.
  while (y < 10.0) {
    acc -= 1.0 / y;
    y += 1.0;
  }
  const double inv = 1.0 / y;
  const double inv2 = inv * inv;
  // -B_{2n}/(2n y^{2n}) terms, n = 1..7.
  const double series = inv2 * (-1.0 / 12.0 +
                        inv2 * (1.0 / 120.0 +
                        inv2 * (-1.0 / 252.0 +
                        inv2 * (1.0 / 240.0 +
                        inv2 * (-1.0 / 132.0 +
                        inv2 * (691.0 / 32760.0 +
                        inv2 * (-1.0 / 12.0)))))));
  return acc + std::log(y) - 0.5 * inv + series;
}

double trigamma_exact(double y) {
  if (!(y > 0.0)) throw std::domain_error("trigamma_exact: argument must be positive");
  double acc = 0.0;
  while (y < 10.0) {
    acc += 1.0 / (y * y);
    y += 1.0;
  }
  const double inv = 1.0 / y;
  const double inv2 = inv * inv;
  // B_{2n} y^{-(2n+1)} terms.
  const double series = inv * inv2 * (1.0 / 6.0 +
                        inv2 * (-1.0 / 30.0 +
                        inv2 * (1.0 / 42.0 +
                        inv2 * (-1.0 / 30.0 +
                        inv2 * (5.0 / 66.0 +
                        inv2 * (-691.0 / 2730.0 +
                        inv2 * (7.0 / 6.0)))))));
  return acc + inv + 0.5 * inv2 + series;
}

ShapePair mom_estimate(double mean, double variance) {
  if (!(mean > 0.0) || !(mean < 1.0))
    throw std::domain_error("mom_estimate: mean must lie in (0,1)");
  const double bound = mean * (1.0 - mean);
  if (!(variance > 0.0) || !(variance < bound))
    throw std::domain_error("mom_estimate: infeasible moments, need 0 < variance < mean*(1-mean)");
  const double scale = bound / variance - 1.0;
  return {mean * scale, (1.0 - mean) * scale};
}

}  // namespace betamix
