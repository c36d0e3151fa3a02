#pragma once

// Numerical building blocks shared by the modelling code: quadrature, bracketed
// root finding, derivative-free minimisation and small descriptive statistics.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace percept::numerics {

using Fn1 = std::function<double(double)>;

// Adaptive Gauss-Kronrod on a finite interval.
double integrate(const Fn1& f, double a, double b, double tol = 1e-9);

// Integral over [a, +inf) / (-inf, b] / the whole line. Uses a double
// exponential substitution, so f must decay.
double integrate_upper_tail(const Fn1& f, double a, double tol = 1e-10);
double integrate_lower_tail(const Fn1& f, double b, double tol = 1e-10);

// Root of f in [lo, hi]; f(lo) and f(hi) must differ in sign (or one is zero).
double find_root(const Fn1& f, double lo, double hi, double x_tol = 1e-13,
                 int max_iter = 200);

// Walks `hi` away from `lo` (doubling the step) until f changes sign, then
// solves. Throws ConvergenceError when no sign change is found within `limit`.
double find_root_expanding(const Fn1& f, double lo, double step, double limit,
                           double x_tol = 1e-13);

struct Minimum {
  double x;
  double fx;
};

// Brent minimisation on [lo, hi].
Minimum minimize_1d(const Fn1& f, double lo, double hi, int bits = 52);

struct SimplexResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> trace;
};

// Nelder-Mead on an unconstrained problem. Converged when the simplex spread
// in f falls below `f_tol` and in x below `x_tol`.
SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                          std::vector<double> x0, std::vector<double> step,
                          double f_tol = 1e-10, double x_tol = 1e-8,
                          int max_iter = 2000);

double mean(std::span<const double> v);
// Sample variance (n - 1 denominator).
double variance(std::span<const double> v);
double stddev(std::span<const double> v);
// Linear-interpolation quantile of *sorted* data (Hyndman-Fan type 7).
double quantile_sorted(std::span<const double> sorted, double p);
double median(std::vector<double> v);
double pearson(std::span<const double> a, std::span<const double> b);

// Two-sided one-sample Kolmogorov-Smirnov statistic; `sorted` ascending.
double ks_statistic(std::span<const double> sorted, const Fn1& cdf);
// Asymptotic p-value with Stephens' small-sample correction.
double ks_pvalue(double d, std::size_t n);

// Silverman's rule-of-thumb bandwidth.
double silverman_bandwidth(std::span<const double> sorted);

// Gaussian kernel density estimate at x, log scale.
double kde_log_density(std::span<const double> draws, double bandwidth, double x);

// Worker threads: PERCEPT_OPS_THREADS if set and positive, else hardware
// concurrency. `set_thread_override` takes precedence when > 0.
unsigned thread_count();
void set_thread_override(unsigned n);

// Runs body(i) for i in [0, n). Each index must write only its own output.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace percept::numerics
