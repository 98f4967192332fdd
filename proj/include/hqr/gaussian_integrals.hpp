// Closed-form integrals of monomials against Gaussian weights.
//
//   I(n, t) = \int_{-t}^{t} x^n e^{-x^2} dx
//   J(n, a, b) = \int_R x^n e^{-a x^2 + b x} dx,   a > 0, b complex
//
// Every Wigner function handled by the library is a polynomial times
// exp(-sum(x^2 + p^2)), so integrating, conditioning and overlapping states
// reduces to these two families.

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hqr {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrtPi = 1.7724538509055160273;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Pascal triangle built once; degrees in this library stay well below the cap.
inline double binomial(int n, int k) {
  constexpr int kMaxRow = 512;
  static const std::vector<std::vector<double>> rows = [] {
    std::vector<std::vector<double>> r{{1.0}};
    for (int n = 1; n <= kMaxRow; ++n) {
      const auto& prev = r.back();
      std::vector<double> next(prev.size() + 1, 1.0);
      for (std::size_t i = 1; i < prev.size(); ++i) next[i] = prev[i - 1] + prev[i];
      r.push_back(std::move(next));
    }
    return r;
  }();
  if (k < 0 || n < 0 || k > n) return 0.0;
  if (n > kMaxRow) throw std::out_of_range("binomial: row too large");
  return rows[n][k];
}

// Integer power by repeated multiplication; 0^0 = 1.
template <class T>
T ipow(T base, int e) {
  T r(1);
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

// (2l - 1)!! with (-1)!! = 1.
inline double odd_double_factorial(int l) {
  double r = 1.0;
  for (int k = 2 * l - 1; k > 1; k -= 2) r *= k;
  return r;
}

namespace detail {

// Regularized lower incomplete gamma P(s, x). Series below s + 1, Lentz
// continued fraction for the complement above.
inline double regularized_lower_gamma(double s, double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double log_prefactor = s * std::log(x) - x - std::lgamma(s);
  if (x < s + 1.0) {
    double term = 1.0 / s;
    double sum = term;
    for (int k = 1; k < 2000; ++k) {
      term *= x / (s + k);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(log_prefactor);
  }
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 2000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return 1.0 - std::exp(log_prefactor) * h;
}

}  // namespace detail

// \int_R x^n e^{-x^2} dx = Gamma((n+1)/2) for even n, 0 for odd n.
inline double full_moment(int n) {
  if (n < 0) throw std::invalid_argument("full_moment: negative power");
  if (n % 2 != 0) return 0.0;
  return std::tgamma((n + 1) / 2.0);
}

// I(n, t) = \int_{-t}^{t} x^n e^{-x^2} dx. t may be +infinity.
inline double interval_moment(int n, double t) {
  if (n < 0) throw std::invalid_argument("interval_moment: negative power");
  if (n % 2 != 0 || t <= 0.0) return 0.0;
  const double s = (n + 1) / 2.0;
  if (std::isinf(t)) return std::tgamma(s);
  return std::tgamma(s) * detail::regularized_lower_gamma(s, t * t);
}

// \int_0^t x^n e^{-x^2} dx for any real t (negative t integrates backwards).
inline double half_line_moment(int n, double t) {
  if (n < 0) throw std::invalid_argument("half_line_moment: negative power");
  if (t == 0.0) return 0.0;
  const double s = (n + 1) / 2.0;
  const double magnitude =
      0.5 * std::tgamma(s) * (std::isinf(t) ? 1.0 : detail::regularized_lower_gamma(s, t * t));
  // The integrand has parity (-1)^n; integrating from 0 to -|t| flips sign once more.
  if (t > 0.0) return magnitude;
  return (n % 2 == 0) ? -magnitude : magnitude;
}

// \int_lo^hi x^n e^{-x^2} dx.
inline double range_moment(int n, double lo, double hi) {
  return half_line_moment(n, hi) - half_line_moment(n, lo);
}

// J(n, a, b) = \int_R x^n e^{-a x^2 + b x} dx for a > 0 and complex b.
// Gaussian with mean b/(2a) and variance 1/(2a), expanded by binomial moments.
inline cplx shifted_moment(int n, double a, cplx b) {
  if (!(a > 0.0)) throw std::invalid_argument("shifted_moment: a must be positive");
  if (n < 0) throw std::invalid_argument("shifted_moment: negative power");
  const cplx mean = b / (2.0 * a);
  const double var = 1.0 / (2.0 * a);
  cplx sum = 0.0;
  for (int l = 0; 2 * l <= n; ++l) {
    sum += binomial(n, 2 * l) * ipow(mean, n - 2 * l) * ipow(var, l) *
           odd_double_factorial(l);
  }
  return std::sqrt(kPi / a) * std::exp(b * b / (4.0 * a)) * sum;
}

// Real specialisation J(n, a, 0).
inline double centered_moment(int n, double a) {
  if (n % 2 != 0) return 0.0;
  return std::tgamma((n + 1) / 2.0) / std::pow(a, (n + 1) / 2.0);
}

// Coefficients g[k] of the polynomial in y with
//   \int_R p^j e^{-a p^2 + beta y p} dp = sqrt(pi/a) e^{beta^2 y^2 / (4a)} sum_k g[k] y^k.
inline std::vector<cplx> fourier_moment_poly(int j, double a, cplx beta) {
  std::vector<cplx> g(j + 1, 0.0);
  const cplx mean_per_y = beta / (2.0 * a);
  const double var = 1.0 / (2.0 * a);
  for (int l = 0; 2 * l <= j; ++l) {
    g[j - 2 * l] += binomial(j, 2 * l) * ipow(mean_per_y, j - 2 * l) * ipow(var, l) *
                    odd_double_factorial(l);
  }
  return g;
}

}  // namespace hqr
