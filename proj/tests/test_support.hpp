#pragma once

// Independent reference implementations used as test oracles. They are kept
// deliberately naive: composite Simpson, direct formulas, no shared code with
// the library beyond the parameter structs.

#include <cmath>
#include <functional>
#include <numbers>

#include "percept/distributions.hpp"

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Variance adjustment written out from the beta-function definition.
inline double sgt_v(double lambda, double p, double q) {
  const double b1 = std::beta(1.0 / p, q);
  const double b2 = std::beta(2.0 / p, q - 1.0 / p);
  const double b3 = std::beta(3.0 / p, q - 2.0 / p);
  const double l2 = lambda * lambda;
  return std::pow(q, -1.0 / p) / std::sqrt((1.0 + 3.0 * l2) * b3 / b1 - 4.0 * l2 * b2 * b2 / (b1 * b1));
}

inline double sgt_pdf(double x, const percept::SgtParams& s) {
  const double v = sgt_v(s.lambda, s.p, s.q);
  const double d = x - s.mu;
  const double sg = d < 0 ? -1.0 : 1.0;
  const double denom = 2.0 * v * s.sigma * std::pow(s.q, 1.0 / s.p) * std::beta(1.0 / s.p, s.q);
  const double core = std::pow(std::abs(d), s.p) /
                      (s.q * std::pow(v * s.sigma, s.p) * std::pow(1.0 + s.lambda * sg, s.p));
  return s.p / denom / std::pow(core + 1.0, 1.0 / s.p + s.q);
}

// Whole-line integral by substitution x = mu + sigma * tan(t).
inline double sgt_integral(const std::function<double(double)>& g, const percept::SgtParams& s,
                           int n = 200000) {
  const double e = 1e-9;
  return simpson(
      [&](double t) {
        const double c = std::cos(t);
        return g(s.mu + s.sigma * std::tan(t)) * s.sigma / (c * c);
      },
      -std::numbers::pi / 2 + e, std::numbers::pi / 2 - e, n);
}

inline double weibull_pdf(double x, double lam, double k) {
  if (x < 0) return 0.0;
  return k / lam * std::pow(x / lam, k - 1) * std::exp(-std::pow(x / lam, k));
}

}  // namespace oracle
