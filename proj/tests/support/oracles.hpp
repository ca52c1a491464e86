#pragma once

// Independent reference computations for the tests.  Nothing here calls the
// library's step or schedule code; loops are written out by hand.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Central differences with step h = 1e-6 (1 + ||x||).
inline Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Plain loops, no Eigen expressions.
inline std::vector<double> matvec(const Mat& a, const std::vector<double>& x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * x[j];
  return y;
}

inline std::vector<double> quad_grad(const Mat& a, const Vec& b, const std::vector<double>& x) {
  auto y = matvec(a, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= b[static_cast<Eigen::Index>(i)];
  return y;
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

inline Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

inline std::vector<double> from_vec(const Vec& v) { return {v.data(), v.data() + v.size()}; }

/// One SAM step on f = 1/2 x'Ax - b'x.
inline Vec quadratic_sam(const Mat& a, const Vec& b, const Vec& x0, double t, double rho) {
  auto x = from_vec(x0);
  auto g = quad_grad(a, b, x);
  const double n = norm(g);
  std::vector<double> probe(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) probe[i] = x[i] + rho * g[i] / n;
  auto gp = quad_grad(a, b, probe);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= t * gp[i];
  return to_vec(x);
}

/// One USAM step on the same quadratic (rho may be negative).
inline Vec quadratic_usam(const Mat& a, const Vec& b, const Vec& x0, double t, double rho) {
  auto x = from_vec(x0);
  auto g = quad_grad(a, b, x);
  std::vector<double> probe(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) probe[i] = x[i] + rho * g[i];
  auto gp = quad_grad(a, b, probe);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= t * gp[i];
  return to_vec(x);
}

/// Sum of c / k^p for k in [lo, hi], accumulated smallest terms first in
/// long double.
inline double power_sum(double c, double p, long lo, long hi) {
  long double s = 0.0L;
  for (long k = hi; k >= lo; --k) s += static_cast<long double>(c) / std::pow(static_cast<long double>(k), p);
  return static_cast<double>(s);
}

/// Integral of c / x^p over [a, b]; with the Euler-Maclaurin half-endpoint
/// correction it approximates the sum to O(1/a^{p+1}).
inline double power_sum_integral(double c, double p, double a, double b) {
  const double integral = p == 1.0 ? c * std::log(b / a) : c * (std::pow(b, 1.0 - p) - std::pow(a, 1.0 - p)) / (1.0 - p);
  return integral + 0.5 * (c / std::pow(a, p) + c / std::pow(b, p));
}

}  // namespace oracle
