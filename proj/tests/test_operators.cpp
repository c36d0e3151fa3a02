#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "percept/error.hpp"
#include "percept/numerics.hpp"
#include "percept/operators.hpp"
#include "test_support.hpp"

using namespace percept;

namespace {

const ViewingContext kCtx = ViewingContext::curve_chart();
const SgtParams kSkewed{-1.1, 0.7, -0.1, 4.6, 31.7};

struct Moments {
  double mean, sd;
};

Moments sample_moments(const ResponseDistribution& d, int n, std::uint64_t seed) {
  auto rng = make_rng(seed, "op-moments", 0);
  std::vector<double> v(n);
  for (auto& x : v) x = d.sample(rng);
  return {numerics::mean(v), numerics::stddev(v)};
}

double ks_p(const ResponseDistribution& d, int n, std::uint64_t seed) {
  auto rng = make_rng(seed, "op-ks", 0);
  std::vector<double> v(n);
  for (auto& x : v) x = d.sample(rng);
  std::sort(v.begin(), v.end());
  return numerics::ks_pvalue(numerics::ks_statistic(v, [&](double x) { return d.cdf(x); }), v.size());
}

double mass(const ResponseDistribution& d, double lo, double hi) {
  return oracle::simpson([&](double x) { return std::exp(d.log_density(x)); }, lo, hi, 200000);
}

// Two-sample KS statistic.
double ks2(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST(Projection, DegenerateAndScaling) {
  auto d = projection(3.0, 4.0, {0.0, 1e-12});
  auto rng = make_rng(1, "p", 0);
  EXPECT_NEAR(d.sample(rng), 3.0, 1e-9);
  const double v1 = *projection(0, 2.0, {0.1, 0.07}).variance();
  const double v2 = *projection(0, 4.0, {0.1, 0.07}).variance();
  EXPECT_NEAR(v2 / v1, 4.0, 1e-12);
  EXPECT_THROW(projection(0, 0.0, {0, 0.05}), DomainError);
  EXPECT_THROW(projection(0, 1.0, {0, 0.0}), DomainError);
}

TEST(Projection, MonteCarloMoments) {
  auto d = projection(5.0, 10.0, {0.2, 0.05});
  auto m = sample_moments(d, 100000, 2);
  EXPECT_NEAR(m.mean, 5.2, 3 * 0.5 / std::sqrt(1e5));
  EXPECT_NEAR(m.sd, 0.5, 0.005);
}

TEST(HighestPointY, SupportMeanQuantiles) {
  auto d = highest_point_y(4.0, {0.6, 1.0});
  EXPECT_EQ(std::exp(d.log_density(4.01)), 0.0);
  EXPECT_EQ(d.support().hi, 4.0);
  EXPECT_NEAR(*d.mean(), 4.0 - 0.6, 1e-14);
  auto w = highest_point_y(4.0, {0.8, 1.7});
  for (double p : {0.1, 0.5, 0.9}) {
    // Weibull quantile written out directly.
    const double eps = 0.8 * std::pow(-std::log1p(-p), 1.0 / 1.7);
    EXPECT_NEAR(w.quantile(1.0 - p), 4.0 - eps, 1e-12);
  }
  EXPECT_GT(ks_p(w, 10000, 3), 0.01);
  EXPECT_NEAR(mass(w, -20.0, 4.0), 1.0, 1e-4);
}

TEST(HighestPointX, PeakAndSymmetry) {
  StimulusCurve sym(SgtParams{0.0, 1.0, 0.0, 2.0, 10.0}, CurveKind::Pdf);
  auto d = highest_point_x(sym, kCtx, {0.5, 1.4}, SideRule::Equal);
  EXPECT_DOUBLE_EQ(d.position_for_error(0.0, Side::Left), 0.0);
  EXPECT_DOUBLE_EQ(d.position_for_error(0.0, Side::Right), 0.0);
  auto m = sample_moments(d, 100000, 4);
  EXPECT_NEAR(m.mean, 0.0, 4 * m.sd / std::sqrt(1e5));
  auto fs = highest_point_x(sym, kCtx, {0.5, 1.4}, SideRule::FlankSlope);
  EXPECT_NEAR(fs.left_probability(0.2), 0.5, 1e-9);
}

TEST(HighestPointX, MatchesTabulatedInverseOracle) {
  StimulusCurve c(kSkewed, CurveKind::Pdf);
  const WeibullErrorParams wp{0.6, 1.3};
  auto d = highest_point_x(c, kCtx, wp, SideRule::Equal);

  // Dense table of each flank: level -> x, inverted by interpolation.
  const int n = 200000;
  std::vector<double> lx, ly, rx, ry;
  for (int i = 0; i <= n; ++i) {
    const double xl = -5.0 + (kSkewed.mu + 5.0) * i / n;
    lx.push_back(xl), ly.push_back(oracle::sgt_pdf(xl, kSkewed));
    const double xr = kSkewed.mu + (5.0 - kSkewed.mu) * i / n;
    rx.push_back(xr), ry.push_back(oracle::sgt_pdf(xr, kSkewed));
  }
  auto invert = [](const std::vector<double>& xs, const std::vector<double>& ys, double y, bool rising) {
    std::size_t lo = 0, hi = xs.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if ((ys[mid] < y) == rising) lo = mid; else hi = mid;
    }
    const double t = (y - ys[lo]) / (ys[hi] - ys[lo]);
    return xs[lo] + t * (xs[hi] - xs[lo]);
  };
  const double peak_va = 2 * std::atan(oracle::sgt_pdf(kSkewed.mu, kSkewed) * 450 / 37.8 / 100) * 180 / std::numbers::pi;
  auto wrng = make_rng(9, "oracle-weibull", 0);
  std::vector<double> ref, lib;
  auto rng = make_rng(9, "lib", 0);
  for (int i = 0; i < 20000; ++i) {
    const double u = percept::uniform_open(wrng);
    const double eps = 0.6 * std::pow(-std::log(u), 1 / 1.3);
    const double theta = peak_va - eps;
    double x;
    const bool left = percept::uniform_open(wrng) < 0.5;
    if (theta <= 0) {
      x = left ? -5.0 : 5.0;
    } else {
      const double y = std::tan(theta / 2 * std::numbers::pi / 180) * 100 * 37.8 / 450;
      if (left) x = y <= ly.front() ? -5.0 : invert(lx, ly, y, true);
      else x = y <= ry.back() ? 5.0 : invert(rx, ry, y, false);
    }
    ref.push_back(x);
    lib.push_back(d.sample(rng));
  }
  // Critical two-sample KS at alpha 0.001 for n = m = 20000 is about 0.0195.
  EXPECT_LT(ks2(ref, lib), 0.0195);
}

TEST(HighestPointX, SamplerAgreesWithCdfAndDensity) {
  StimulusCurve c(kSkewed, CurveKind::Pdf);
  auto d = highest_point_x(c, kCtx, {0.3, 1.6}, SideRule::FlankSlope);
  EXPECT_GT(ks_p(d, 10000, 6), 0.01);
  EXPECT_NEAR(mass(d, -5.0, 5.0), 1.0, 1e-4);
  // log_density is the derivative of cdf.
  for (double x : {-2.0, -1.3, -0.8, 0.2}) {
    const double h = 1e-5;
    EXPECT_NEAR((d.cdf(x + h) - d.cdf(x - h)) / (2 * h), std::exp(d.log_density(x)), 1e-3);
  }
}

TEST(GaussianOperators, Moments) {
  for (auto make : {+[](double t, const GaussianOpParams& p) { return highest_point_x_gaussian(t, p); },
                    +[](double t, const GaussianOpParams& p) { return bisect_area(t, p); }}) {
    EXPECT_EQ(*make(1.5, {0.0, 0.4}).mean(), 1.5);
    auto d = make(1.5, {0.3, 0.4});
    EXPECT_NEAR(d.log_density(1.8 + 0.25), d.log_density(1.8 - 0.25), 1e-14);
    auto m = sample_moments(d, 100000, 7);
    EXPECT_NEAR(m.mean, 1.8, 3 * 0.4 / std::sqrt(1e5));
    EXPECT_NEAR(m.sd, 0.4, 0.004);
  }
  EXPECT_THROW(bisect_area(0, {0, 0.1, SpreadKind::Multiplicative}), DomainError);
}

TEST(MaxSlope, SupportDeficitAndPosition) {
  auto d = max_slope(2.0, {0.3, 1.2});
  auto rng = make_rng(8, "ms", 0);
  double deficit = 0;
  long rejected = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double s = d.sample_counted(rng, rejected);
    ASSERT_LE(s, 2.0);
    ASSERT_GT(s, 0.0);
    deficit += 2.0 - s;
  }
  // P(eps >= 2) = exp(-(2 / 0.3)^1.2), about 5.8 per 1e5 draws.
  const double tail = n * std::exp(-std::pow(2.0 / 0.3, 1.2));
  EXPECT_NEAR(double(rejected), tail, 4 * std::sqrt(tail) + 1);
  const double expect = 0.3 * std::tgamma(1 + 1 / 1.2);
  EXPECT_NEAR(deficit / n, expect, 3 * std::sqrt(weibull({0.3, 1.2}).variance() / n));
  EXPECT_THROW(max_slope(0.0, {1, 1}), DomainError);

  StimulusCurve c(kSkewed, CurveKind::Cdf);
  auto pk = max_va_slope(c, kCtx);
  EXPECT_DOUBLE_EQ(max_slope_position(pk.value, c, SideRule::FlankSlope, kCtx, rng), pk.x);
}

TEST(MaxSlope, RedrawsAndKs) {
  // Weibull with a long tail relative to theta: many redraws.
  auto d = max_slope(0.5, {1.0, 1.0});
  auto rng = make_rng(5, "ms-rej", 0);
  long rejected = 0;
  for (int i = 0; i < 1000; ++i) d.sample_counted(rng, rejected);
  EXPECT_GT(rejected, 500);
  EXPECT_GT(ks_p(d, 10000, 10), 0.01);
  EXPECT_NEAR(mass(d, 0.0, 0.5), 1.0, 1e-4);
}

TEST(Bahp, WeightFormula) {
  BahpParams p{{0.0, 1.0}, {0.0, 1.0}};
  EXPECT_DOUBLE_EQ(bahp_weight(0.3, 0.3, p), 0.5);
  auto t = bahp_terms(0.3, 0.3, {{0.0, 1.0}, {0.0, 0.7}});
  EXPECT_DOUBLE_EQ(t.mse_hp, 0.49);
  // MSE_BA = 1, MSE_HP = 3.
  BahpParams q{{0.0, 1.0}, {1.0, std::sqrt(2.0)}};
  EXPECT_NEAR(bahp_weight(0.0, 0.0, q), 0.75, 1e-15);
  BahpParams wide{{0.0, 1.0}, {0.0, 1e8}};
  EXPECT_GT(bahp_weight(0, 0, wide), 1 - 1e-15);
}

TEST(Bahp, WeightMonotoneInGap) {
  BahpParams p{{0.1, 0.6}, {0.0, 0.4}};
  double prev = -1;
  for (int i = 0; i <= 1000; ++i) {
    const double gap = 0.01 * i;
    const double w = bahp_weight(gap, 0.0, p);
    ASSERT_GT(w, prev);
    prev = w;
  }
  EXPECT_GT(prev, 0.99);
}

TEST(Bahp, UnbiasedFusionAndVariance) {
  BahpParams p{{0.0, 0.8}, {0.0, 0.5}};
  auto d = bahp(2.0, 2.0, p);
  EXPECT_NEAR(*d.mean(), 2.0, 1e-15);
  auto m = sample_moments(d, 100000, 11);
  EXPECT_LE(m.sd * m.sd, std::min(0.64, 0.25));
  // The inverse-MSE weight is the variance minimiser over a sweep of w.
  const double w_star = bahp_weight(2.0, 2.0, p);
  auto var = [&](double w) { return w * w * 0.64 + (1 - w) * (1 - w) * 0.25; };
  for (double w = 0; w <= 1; w += 0.01) EXPECT_GE(var(w) + 1e-15, var(w_star));
  for (double w = 0.01; w <= w_star; w += 0.01) EXPECT_LE(var(w), var(w - 0.01));
}

TEST(Mixture, DegenerateBimodalProportions) {
  MixtureParams one{1.0, {0.1, 0.3}, {0.0, 0.3}};
  auto m1 = mixture(1.0, 3.0, one);
  auto ba = bisect_area(1.0, {0.1, 0.3});
  for (double x : {0.5, 1.1, 2.0}) EXPECT_NEAR(m1.log_density(x), ba.log_density(x), 1e-12);

  MixtureParams half{0.5, {0.0, 0.3}, {0.0, 0.3}};
  auto m = mixture(0.0, 4.0, half);
  auto f = [&](double x) { return m.log_density(x); };
  EXPECT_GT(f(0.0), f(-0.1));
  EXPECT_GT(f(0.0), f(0.1));
  EXPECT_GT(f(4.0), f(3.9));
  EXPECT_GT(f(4.0), f(4.1));
  EXPECT_LT(f(2.0), f(0.0));

  MixtureParams p{0.3, {0.0, 0.3}, {0.0, 0.3}};
  auto mx = mixture(0.0, 10.0, p);
  auto rng = make_rng(3, "mix", 0);
  int left = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) left += mx.sample(rng) < 5.0;
  EXPECT_NEAR(double(left) / n, 0.3, 3 * std::sqrt(0.21 / n));
  EXPECT_GT(ks_p(mx, 10000, 12), 0.01);
  EXPECT_NEAR(mass(mx, -5, 15), 1.0, 1e-4);
}

TEST(Params, JsonRoundTrip) {
  for (auto tag : {OperatorTag::ProjectToAxisY, OperatorTag::HighestPoint, OperatorTag::BisectArea,
                   OperatorTag::Bahp, OperatorTag::Mixture}) {
    OperatorParams p;
    switch (tag) {
      case OperatorTag::ProjectToAxisY: p = ProjectionParams{0.1, 0.04}; break;
      case OperatorTag::HighestPoint: p = WeibullErrorParams{0.4, 1.3}; break;
      case OperatorTag::BisectArea: p = GaussianOpParams{0.1, 0.3}; break;
      case OperatorTag::Bahp: p = BahpParams{{0.1, 0.3}, {0.2, 0.4}}; break;
      default: p = MixtureParams{0.4, {0.1, 0.3}, {0.2, 0.4}}; break;
    }
    auto back = params_from_json(tag, params_to_json(p));
    EXPECT_EQ(params_to_json(back), params_to_json(p)) << to_string(tag);
  }
  EXPECT_EQ(operator_tag_from_string("max_slope"), OperatorTag::MaxSlope);
  EXPECT_THROW(operator_tag_from_string("nope"), std::exception);
}
