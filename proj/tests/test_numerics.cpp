#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <vector>

#include "percept/error.hpp"
#include "percept/numerics.hpp"
#include "percept/rng.hpp"

namespace nm = percept::numerics;

TEST(Quadrature, FiniteInterval) {
  EXPECT_NEAR(nm::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi), 2.0, 1e-12);
  EXPECT_NEAR(nm::integrate([](double x) { return x * x; }, -1.0, 2.0), 3.0, 1e-12);
}

TEST(Quadrature, Tails) {
  EXPECT_NEAR(nm::integrate_upper_tail([](double x) { return std::exp(-x); }, 1.0), std::exp(-1.0), 1e-10);
  EXPECT_NEAR(nm::integrate_lower_tail([](double x) { return std::exp(x); }, 0.0), 1.0, 1e-10);
  // Cauchy-like polynomial tail.
  EXPECT_NEAR(nm::integrate_upper_tail([](double x) { return 1.0 / (1.0 + x * x); }, 0.0),
              std::numbers::pi / 2, 1e-8);
}

TEST(RootFinding, Bracketed) {
  const double r = nm::find_root([](double x) { return x * x - 2.0; }, 0.0, 2.0);
  EXPECT_NEAR(r, std::sqrt(2.0), 1e-12);
  EXPECT_THROW(nm::find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0), percept::ConvergenceError);
}

TEST(RootFinding, Expanding) {
  const double r = nm::find_root_expanding([](double x) { return x - 37.5; }, 0.0, 1.0, 1e3);
  EXPECT_NEAR(r, 37.5, 1e-10);
  EXPECT_THROW(nm::find_root_expanding([](double) { return 1.0; }, 0.0, 1.0, 10.0),
               percept::ConvergenceError);
}

TEST(Minimize, BrentAndSimplex) {
  auto m = nm::minimize_1d([](double x) { return (x - 0.3) * (x - 0.3) + 1.0; }, -2.0, 2.0);
  EXPECT_NEAR(m.x, 0.3, 1e-7);
  EXPECT_NEAR(m.fx, 1.0, 1e-12);

  auto rosen = [](std::span<const double> x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  auto r = nm::nelder_mead(rosen, {-1.2, 1.0}, {0.5, 0.5}, 1e-14, 1e-10, 5000);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(Descriptive, Basics) {
  std::vector<double> v{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(nm::mean(v), 2.5);
  EXPECT_DOUBLE_EQ(nm::variance(v), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(nm::median(v), 2.5);
  std::vector<double> s{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(nm::quantile_sorted(s, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(nm::quantile_sorted(s, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(nm::quantile_sorted(s, 0.5), 2.5);
  std::vector<double> a{1, 2, 3}, b{2, 4, 6}, c{3, 2, 1};
  EXPECT_NEAR(nm::pearson(a, b), 1.0, 1e-15);
  EXPECT_NEAR(nm::pearson(a, c), -1.0, 1e-15);
}

TEST(Ks, UniformSampleAndShiftedSample) {
  auto rng = percept::make_rng(7, "ks", 0);
  std::vector<double> u(2000), shifted(2000);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = percept::uniform_open(rng);
    shifted[i] = std::min(1.0, u[i] + 0.1);
  }
  std::sort(u.begin(), u.end());
  std::sort(shifted.begin(), shifted.end());
  auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_GT(nm::ks_pvalue(nm::ks_statistic(u, cdf), u.size()), 0.01);
  EXPECT_LT(nm::ks_pvalue(nm::ks_statistic(shifted, cdf), shifted.size()), 1e-6);
  EXPECT_NEAR(nm::ks_pvalue(0.0, 100), 1.0, 1e-12);
}

TEST(Kde, StandardNormalDraws) {
  auto rng = percept::make_rng(3, "kde", 0);
  std::vector<double> d(5000);
  for (auto& x : d) x = percept::standard_normal(rng);
  std::sort(d.begin(), d.end());
  const double h = nm::silverman_bandwidth(d);
  EXPECT_GT(h, 0.1);
  EXPECT_LT(h, 0.4);
  // Smoothed density at 0 is N(0, 1 + h^2) at 0.
  const double expected = -0.5 * std::log(2 * std::numbers::pi * (1 + h * h));
  EXPECT_NEAR(nm::kde_log_density(d, h, 0.0), expected, 0.05);
}

TEST(Rng, DerivedSeedsAreStableAndDistinct) {
  static_assert(percept::hash_id("") == 0xcbf29ce484222325ULL);
  EXPECT_EQ(percept::derive_seed(1, "a", 2), percept::derive_seed(1, "a", 2));
  EXPECT_NE(percept::derive_seed(1, "a", 2), percept::derive_seed(1, "a", 3));
  EXPECT_NE(percept::derive_seed(1, "a", 2), percept::derive_seed(1, "b", 2));
  EXPECT_NE(percept::derive_seed(1, "a", 2), percept::derive_seed(2, "a", 2));
}

TEST(Threads, ParallelForVisitsEveryIndexOnce) {
  for (unsigned t : {1u, 3u, 8u}) {
    nm::set_thread_override(t);
    std::vector<std::atomic<int>> hits(1000);
    nm::parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) ASSERT_EQ(h.load(), 1);
  }
  nm::set_thread_override(0);
}
