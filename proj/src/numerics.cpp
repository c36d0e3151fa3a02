#include "percept/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "percept/error.hpp"

namespace percept::numerics {

double integrate(const Fn1& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol,
                                                                       &err);
}

double integrate_upper_tail(const Fn1& f, double a, double tol) {
  boost::math::quadrature::exp_sinh<double> es;
  return es.integrate([&](double t) { return f(a + t); }, 0.0,
                      std::numeric_limits<double>::infinity(), tol);
}

double integrate_lower_tail(const Fn1& f, double b, double tol) {
  boost::math::quadrature::exp_sinh<double> es;
  return es.integrate([&](double t) { return f(b - t); }, 0.0,
                      std::numeric_limits<double>::infinity(), tol);
}

double find_root(const Fn1& f, double lo, double hi, double x_tol, int max_iter) {
  if (lo > hi) std::swap(lo, hi);
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    std::ostringstream msg;
    msg << "root not bracketed on [" << lo << ", " << hi << "]: f = " << flo << ", "
        << fhi;
    throw ConvergenceError(msg.str(), {});
  }
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  auto tol = [x_tol](double a, double b) {
    return std::abs(b - a) <= x_tol * std::max(1.0, std::abs(a));
  };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  if (iters >= static_cast<std::uintmax_t>(max_iter)) {
    throw ConvergenceError("root finder exceeded iteration limit", {});
  }
  return 0.5 * (r.first + r.second);
}

double find_root_expanding(const Fn1& f, double lo, double step, double limit,
                           double x_tol) {
  const double flo = f(lo);
  if (flo == 0.0) return lo;
  double prev = lo;
  double hi = lo + step;
  std::vector<std::string> trace;
  while (std::abs(hi - lo) <= limit) {
    const double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) != (fhi > 0.0)) return find_root(f, prev, hi, x_tol);
    trace.push_back("f(" + std::to_string(hi) + ") = " + std::to_string(fhi));
    prev = hi;
    step *= 2.0;
    hi = lo + step;
  }
  throw ConvergenceError("no sign change found while expanding bracket", trace);
}

Minimum minimize_1d(const Fn1& f, double lo, double hi, int bits) {
  auto r = boost::math::tools::brent_find_minima(f, lo, hi, bits);
  return {r.first, r.second};
}

SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                          std::vector<double> x0, std::vector<double> step,
                          double f_tol, double x_tol, int max_iter) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);

  SimplexResult res;
  std::vector<std::size_t> order(n + 1);
  auto eval = [&](const std::vector<double>& x) { return f(x); };

  for (int it = 0; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double x_spread = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d)
        x_spread = std::max(x_spread, std::abs(pts[i][d] - pts[best][d]));
    const double f_spread = std::abs(fv[worst] - fv[best]);
    res.iterations = it;
    if (it % 50 == 0) {
      std::ostringstream s;
      s << "iter " << it << " f=" << fv[best] << " spread=" << f_spread;
      res.trace.push_back(s.str());
    }
    if (f_spread <= f_tol * (1.0 + std::abs(fv[best])) && x_spread <= x_tol) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / double(n);
    }
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t d = 0; d < n; ++d) x[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
      return x;
    };

    auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    auto xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      pts[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d)
        pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
      fv[i] = eval(pts[i]);
    }
  }
  const auto best =
      static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = pts[best];
  res.fx = fv[best];
  return res;
}

double mean(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / double(v.size() - 1);
}

double stddev(std::span<const double> v) { return std::sqrt(variance(v)); }

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (double(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double ma = mean(a.first(n));
  const double mb = mean(b.first(n));
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

double ks_statistic(std::span<const double> sorted, const Fn1& cdf) {
  const double n = double(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double rn = std::sqrt(double(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double silverman_bandwidth(std::span<const double> sorted) {
  const double n = double(sorted.size());
  const double sd = stddev(sorted);
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  double h = 0.9 * spread * std::pow(n, -0.2);
  if (!(h > 0.0)) {
    const double scale = sorted.empty() ? 1.0 : std::max(1.0, std::abs(sorted.front()));
    h = 1e-9 * scale;
  }
  return h;
}

double kde_log_density(std::span<const double> draws, double bandwidth, double x) {
  // log-sum-exp over the kernels
  double max_e = -std::numeric_limits<double>::infinity();
  for (double d : draws) {
    const double z = (x - d) / bandwidth;
    max_e = std::max(max_e, -0.5 * z * z);
  }
  double s = 0.0;
  for (double d : draws) {
    const double z = (x - d) / bandwidth;
    s += std::exp(-0.5 * z * z - max_e);
  }
  const double log_norm =
      std::log(double(draws.size()) * bandwidth) + 0.5 * std::log(2.0 * std::numbers::pi);
  return max_e + std::log(s) - log_norm;
}

namespace {
std::atomic<unsigned> g_thread_override{0};
}

unsigned thread_count() {
  if (unsigned o = g_thread_override.load(); o > 0) return o;
  if (const char* env = std::getenv("PERCEPT_OPS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_thread_override(unsigned n) { g_thread_override.store(n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace percept::numerics
