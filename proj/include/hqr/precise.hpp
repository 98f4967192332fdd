// Extended-precision helpers for the one-off setup computations whose
// binomial expansions cancel catastrophically at the degrees reached after
// four or five growth iterations (up to 64 per axis).

#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <complex>
#include <stdexcept>
#include <vector>

#include "hqr/gaussian_integrals.hpp"

namespace hqr::precise {

using Real = boost::multiprecision::cpp_bin_float_50;
using Int = __int128;

inline constexpr int kMaxExactRow = 128;

// C(n, k) as an exact 128-bit integer for n <= 128.
inline Int exact_binomial(int n, int k) {
  static const std::vector<std::vector<Int>> rows = [] {
    std::vector<std::vector<Int>> r{{1}};
    for (int n = 1; n <= kMaxExactRow; ++n) {
      const auto& prev = r.back();
      std::vector<Int> next(prev.size() + 1, 1);
      for (std::size_t i = 1; i < prev.size(); ++i) next[i] = prev[i - 1] + prev[i];
      r.push_back(std::move(next));
    }
    return r;
  }();
  if (k < 0 || n < 0 || k > n) return 0;
  if (n > kMaxExactRow) throw std::out_of_range("exact_binomial: row too large");
  return rows[n][k];
}

inline Real to_real(Int v) {
  const bool neg = v < 0;
  if (neg) v = -v;
  const auto hi = static_cast<unsigned long long>(v >> 64);
  const auto lo = static_cast<unsigned long long>(v);
  Real r = Real(hi) * Real(18446744073709551616.0) + Real(lo);
  return neg ? -r : r;
}

// Nearest double to an exact integer.
inline double to_double(Int v) { return static_cast<double>(to_real(v)); }

// C(n, k) in extended precision; exact integers up to 2^166.
inline Real binomial(int n, int k) {
  constexpr int kMaxRow = 320;
  static const std::vector<std::vector<Real>> rows = [] {
    std::vector<std::vector<Real>> r{{Real(1)}};
    for (int n = 1; n <= kMaxRow; ++n) {
      const auto& prev = r.back();
      std::vector<Real> next(prev.size() + 1, Real(1));
      for (std::size_t i = 1; i < prev.size(); ++i) next[i] = prev[i - 1] + prev[i];
      r.push_back(std::move(next));
    }
    return r;
  }();
  if (k < 0 || n < 0 || k > n) return Real(0);
  if (n > kMaxRow) throw std::out_of_range("precise::binomial: row too large");
  return rows[n][k];
}

inline Real pi() { return boost::math::constants::pi<Real>(); }

inline Real ipow(Real base, int e) {
  Real r = 1;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

// J(n, a, b) = \int x^n e^{-a x^2 + b x} dx for real a > 0 and real b.
inline Real shifted_moment(int n, const Real& a, const Real& b) {
  const Real mean = b / (2 * a);
  const Real var = 1 / (2 * a);
  Real sum = 0;
  Real dfact = 1;  // (2l - 1)!!
  Real var_pow = 1;
  for (int l = 0; 2 * l <= n; ++l) {
    if (l > 0) {
      dfact *= (2 * l - 1);
      var_pow *= var;
    }
    sum += binomial(n, 2 * l) * ipow(mean, n - 2 * l) * var_pow * dfact;
  }
  return boost::multiprecision::sqrt(pi() / a) * boost::multiprecision::exp(b * b / (4 * a)) * sum;
}

}  // namespace hqr::precise
