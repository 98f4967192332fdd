// Joint operations on one mode taken from each of two independent states:
// a balanced beam splitter between them followed by a projection or a
// quadrature measurement. The two modes never have to be materialised in a
// common tensor; only the rest of each state survives.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hqr/density.hpp"
#include "hqr/phase_space_state.hpp"
#include "hqr/precise.hpp"

namespace hqr {

// Values of one quadrature axis of a two-mode integral kernel, laid out as
// K[k * (db + 1) + k'] for powers k of the left mode and k' of the right one.
using AxisKernel = std::vector<double>;

// coeff * Kx (x) Kp acting on the contracted pair.
struct PairKernel {
  double coeff = 1.0;
  AxisKernel x;
  AxisKernel p;
};

namespace detail {

// Coefficient of u^a v^{k+k'-a} in (u + v)^k (v - u)^{k'}, exact.
inline std::vector<precise::Int> rotation_coeffs(int k, int kp) {
  std::vector<precise::Int> c(k + kp + 1, 0);
  for (int r = 0; r <= k; ++r)
    for (int b = 0; b <= kp; ++b) {
      const precise::Int t = precise::exact_binomial(k, r) * precise::exact_binomial(kp, b);
      c[r + b] += (b % 2 == 0) ? t : -t;
    }
  return c;
}

// \int t^n e^{-a t^2} dt in extended precision.
inline precise::Real gauss_moment(int n, const precise::Real& a) {
  if (n % 2 != 0) return precise::Real(0);
  return boost::multiprecision::tgamma(precise::Real(n + 1) / 2) /
         boost::multiprecision::pow(a, precise::Real(n + 1) / 2);
}

inline precise::Real inv_sqrt2_pow(int n) { return boost::multiprecision::pow(precise::Real(2), -precise::Real(n) / 2); }

}  // namespace detail

// Axis coordinates before the beam splitter are (s, t) = ((u + v)/sqrt2,
// (v - u)/sqrt2), u and v the output coordinates of the left and right mode.
// This integrates s^k t^{k'} e^{-s^2 - t^2} against e^{-(au - 1) u^2 - (av - 1) v^2},
// so au = av = 1 is the plain integral over both outputs.
inline AxisKernel integrated_axis_kernel(int da, int db, double au, double av) {
  AxisKernel out(static_cast<std::size_t>((da + 1) * (db + 1)), 0.0);
  const precise::Real pu(au), pv(av);
  for (int k = 0; k <= da; ++k)
    for (int kp = 0; kp <= db; ++kp) {
      const auto c = detail::rotation_coeffs(k, kp);
      const int n = k + kp;
      precise::Real acc = 0;
      for (int a = 0; a <= n; ++a) {
        if (c[a] == 0 || a % 2 != 0 || (n - a) % 2 != 0) continue;
        acc += precise::to_real(c[a]) * detail::gauss_moment(a, pu) * detail::gauss_moment(n - a, pv);
      }
      out[k * (db + 1) + kp] = static_cast<double>(acc * detail::inv_sqrt2_pow(n));
    }
  return out;
}

enum class Output { Left, Right };

// One output coordinate fixed to w, the other integrated: the kernel equals
// e^{-w^2} sum_e poly[k][k'][e] w^e. Layout poly[(k * (db + 1) + k') * (da + db + 1) + e].
struct FixedAxisPoly {
  int da = 0, db = 0;
  std::vector<double> poly;

  int width() const { return da + db + 1; }

  AxisKernel at(double w) const {
    AxisKernel out(static_cast<std::size_t>((da + 1) * (db + 1)), 0.0);
    const double g = std::exp(-w * w);
    std::vector<double> pw(width(), 1.0);
    for (int e = 1; e < width(); ++e) pw[e] = pw[e - 1] * w;
    for (std::size_t q = 0; q < out.size(); ++q) {
      const double* c = &poly[q * width()];
      double acc = 0.0;
      for (int e = 0; e < width(); ++e) acc += c[e] * pw[e];
      out[q] = acc * g;
    }
    return out;
  }

  // Density coefficients in w of sum_{k,k'} B[k][k'] K[k][k'](w).
  PolyGaussDensity contract(const std::vector<double>& b) const {
    std::vector<double> c(width(), 0.0);
    for (std::size_t q = 0; q < b.size(); ++q) {
      if (b[q] == 0.0) continue;
      const double* src = &poly[q * width()];
      for (int e = 0; e < width(); ++e) c[e] += b[q] * src[e];
    }
    return PolyGaussDensity(std::move(c));
  }
};

inline FixedAxisPoly fixed_axis_poly(int da, int db, Output fixed) {
  FixedAxisPoly f{da, db, {}};
  f.poly.assign(static_cast<std::size_t>((da + 1) * (db + 1) * f.width()), 0.0);
  const precise::Real one(1);
  for (int k = 0; k <= da; ++k)
    for (int kp = 0; kp <= db; ++kp) {
      const auto c = detail::rotation_coeffs(k, kp);
      const int n = k + kp;
      const precise::Real scale = detail::inv_sqrt2_pow(n);
      double* dst = &f.poly[static_cast<std::size_t>(k * (db + 1) + kp) * f.width()];
      for (int a = 0; a <= n; ++a) {
        if (c[a] == 0) continue;
        // u^a v^{n-a}: the free coordinate is integrated, the fixed one stays a power of w.
        const int free_pow = fixed == Output::Left ? n - a : a;
        const int w_pow = n - free_pow;
        if (free_pow % 2 != 0) continue;
        dst[w_pow] += static_cast<double>(precise::to_real(c[a]) * detail::gauss_moment(free_pow, one) * scale);
      }
    }
  return f;
}

namespace detail {

struct Split {
  std::size_t outer, local, inner;
};

inline Split split_at(const PhaseSpaceState& w, int mode) {
  const std::size_t local = w.local_size(mode);
  const std::size_t inner = w.stride(mode);
  return {w.size() / (local * inner), local, inner};
}

inline std::vector<int> degrees_without(const PhaseSpaceState& w, int mode) {
  auto d = w.degrees();
  d.erase(d.begin() + mode);
  return d;
}

inline Eigen::MatrixXd pair_matrix(const std::vector<PairKernel>& kernels, int da, int db) {
  const int na = (da + 1) * (da + 1), nb = (db + 1) * (db + 1);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(na, nb);
  for (const auto& pk : kernels) {
    if (pk.x.size() != static_cast<std::size_t>((da + 1) * (db + 1)) || pk.p.size() != pk.x.size())
      throw std::invalid_argument("contract_pair: kernel shape");
    for (int i = 0; i <= da; ++i)
      for (int j = 0; j <= da; ++j)
        for (int ip = 0; ip <= db; ++ip)
          for (int jp = 0; jp <= db; ++jp)
            k(i * (da + 1) + j, ip * (db + 1) + jp) += pk.coeff * pk.x[i * (db + 1) + ip] * pk.p[j * (db + 1) + jp];
  }
  return k;
}

}  // namespace detail

// Integrates mode `lm` of `left` and mode `rm` of `right` against the kernel
// sum; the result carries the remaining modes of left, then those of right.
// The weight is the product of the input weights; the coefficients are raw.
inline PhaseSpaceState contract_pair(const PhaseSpaceState& left, int lm, const PhaseSpaceState& right, int rm,
                                     const std::vector<PairKernel>& kernels) {
  const auto ls = detail::split_at(left, lm);
  const auto rs = detail::split_at(right, rm);
  const int da = left.degree(lm), db = right.degree(rm);

  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  // L[(o, t)][loc], R[loc][(o, t)]
  RowMat lmat(ls.outer * ls.inner, ls.local);
  const auto lc = left.coeffs();
  for (std::size_t o = 0; o < ls.outer; ++o)
    for (std::size_t l = 0; l < ls.local; ++l)
      for (std::size_t t = 0; t < ls.inner; ++t) lmat(o * ls.inner + t, l) = lc[(o * ls.local + l) * ls.inner + t];
  Eigen::MatrixXd rmat(rs.local, rs.outer * rs.inner);
  const auto rc = right.coeffs();
  for (std::size_t o = 0; o < rs.outer; ++o)
    for (std::size_t l = 0; l < rs.local; ++l)
      for (std::size_t t = 0; t < rs.inner; ++t) rmat(l, o * rs.inner + t) = rc[(o * rs.local + l) * rs.inner + t];

  Eigen::MatrixXd prod;
  if (static_cast<std::size_t>(lmat.rows()) <= static_cast<std::size_t>(rmat.cols())) {
    // Each kernel is Kx (x) Kp: apply it to L one axis at a time, then one product with R.
    Eigen::MatrixXd lk = Eigen::MatrixXd::Zero(lmat.rows(), rmat.rows());
    for (const auto& pk : kernels) {
      if (pk.x.size() != static_cast<std::size_t>((da + 1) * (db + 1)) || pk.p.size() != pk.x.size())
        throw std::invalid_argument("contract_pair: kernel shape");
      const Eigen::Map<const RowMat> kx(pk.x.data(), da + 1, db + 1);
      const Eigen::Map<const RowMat> kp(pk.p.data(), da + 1, db + 1);
      for (Eigen::Index r = 0; r < lmat.rows(); ++r) {
        // row r holds B[i][j]; Kx^T B Kp maps it onto (i', j')
        const Eigen::Map<const RowMat> b(lmat.data() + r * lmat.cols(), da + 1, da + 1);
        const RowMat t = kx.transpose() * b * kp;
        for (int ip = 0; ip <= db; ++ip)
          for (int jp = 0; jp <= db; ++jp) lk(r, ip * (db + 1) + jp) += pk.coeff * t(ip, jp);
      }
    }
    prod = lk * rmat;
  } else {
    const Eigen::MatrixXd k = detail::pair_matrix(kernels, da, db);
    prod = lmat * (k * rmat);
  }

  auto degrees = detail::degrees_without(left, lm);
  const auto rd = detail::degrees_without(right, rm);
  degrees.insert(degrees.end(), rd.begin(), rd.end());
  PhaseSpaceState out(degrees, left.weight() * right.weight());
  auto dst = out.coeffs();
  const auto cols = static_cast<std::size_t>(prod.cols());
  for (std::size_t r = 0; r < static_cast<std::size_t>(prod.rows()); ++r)
    for (std::size_t c = 0; c < cols; ++c) dst[r * cols + c] = prod(r, c);
  detail::flush_small(out);
  return trimmed(out);
}

// Traces every mode except `mode`: the local coefficients of the reduced
// one-mode function, raw.
inline std::vector<double> reduce_to_mode(const PhaseSpaceState& w, int mode) {
  PhaseSpaceState r = w;
  for (int m = w.modes() - 1; m >= 0; --m)
    if (m != mode) r = contract_mode(r, m, trace_functional(r.degree(m)));
  const auto c = r.coeffs();
  return {c.begin(), c.end()};
}

}  // namespace hqr
