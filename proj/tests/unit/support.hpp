#pragma once

// Reference values computed without the library's own kernels.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// He_n(x) / sqrt(n!) from the explicit sum n! sum_m (-1)^m x^{n-2m} / (m! (n-2m)! 2^m).
inline double hermite_explicit(int n, double x) {
  double s = 0.0;
  for (int m = 0; 2 * m <= n; ++m) {
    s += (m % 2 ? -1.0 : 1.0) * std::pow(x, n - 2 * m) / (factorial(m) * factorial(n - 2 * m) * std::pow(2.0, m));
  }
  return s * factorial(n) / std::sqrt(factorial(n));
}

// E x^p under the standard Gaussian.
inline double gaussian_moment(int p) {
  if (p % 2) return 0.0;
  double m = 1.0;
  for (int j = p - 1; j > 0; j -= 2) m *= j;
  return m;
}

// Cameron-Martin coefficients c_n = c^n / sqrt(n!).
inline std::vector<double> cameron_martin(double c, int N) {
  std::vector<double> out;
  for (int n = 0; n <= N; ++n) out.push_back(std::pow(c, n) / std::sqrt(factorial(n)));
  return out;
}

inline double phi_density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Integral of g against gamma_1 by Simpson on [-12, 12].
template <class F>
double gaussian_expectation(F g, int n = 24000) {
  return simpson([&](double x) { return g(x) * phi_density(x); }, -12.0, 12.0, n);
}

}  // namespace oracle
