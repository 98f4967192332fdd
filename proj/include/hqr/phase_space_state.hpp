// Multimode Wigner functions of the form
//
//   W(x_1, p_1, ..., x_k, p_k) = sum_I w_I prod_m x_m^{i_m} p_m^{j_m} exp(-sum_m (x_m^2 + p_m^2))
//
// Every state reachable from Fock-basis-finite inputs through passive linear
// optics, loss and quadrature/photon-detection conditioning stays in this
// family, so all protocol steps are exact coefficient manipulations.
//
// Coefficient tensors are stored normalized (total integral 1). The separate
// `weight` carries the accumulated probability of the heralding events that
// produced the state.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hqr/density.hpp"
#include "hqr/format.hpp"
#include "hqr/gaussian_integrals.hpp"

namespace hqr {

enum class Quadrature { Position, Momentum };

class PhaseSpaceState {
 public:
  // Zero-mode state: a single scalar coefficient.
  PhaseSpaceState() : coeffs_(1, 1.0) {}

  explicit PhaseSpaceState(std::vector<int> degrees, double weight = 1.0)
      : degrees_(std::move(degrees)), weight_(weight) {
    std::size_t n = 1;
    for (int d : degrees_) {
      if (d < 0) throw std::invalid_argument("PhaseSpaceState: negative degree");
      n *= static_cast<std::size_t>(d + 1) * static_cast<std::size_t>(d + 1);
    }
    coeffs_.assign(n, 0.0);
  }

  int modes() const { return static_cast<int>(degrees_.size()); }
  const std::vector<int>& degrees() const { return degrees_; }
  int degree(int mode) const { return degrees_.at(mode); }
  std::size_t size() const { return coeffs_.size(); }

  // Number of (x-power, p-power) pairs of one mode.
  std::size_t local_size(int mode) const {
    const auto d = static_cast<std::size_t>(degree(mode)) + 1;
    return d * d;
  }

  // Flat-index stride of one mode's local index (mode 0 varies slowest).
  std::size_t stride(int mode) const {
    std::size_t s = 1;
    for (int m = modes() - 1; m > mode; --m) s *= local_size(m);
    return s;
  }

  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }

  double weight() const { return weight_; }
  void set_weight(double w) { weight_ = w; }

  // powers = {x_0, p_0, x_1, p_1, ...}; out-of-range powers read as zero.
  double at(std::initializer_list<int> powers) const {
    const auto idx = index_of(std::span<const int>(powers.begin(), powers.size()));
    return idx == npos ? 0.0 : coeffs_[idx];
  }
  double& at(std::initializer_list<int> powers) {
    const auto idx = index_of(std::span<const int>(powers.begin(), powers.size()));
    if (idx == npos) throw std::out_of_range("PhaseSpaceState::at: power exceeds degree");
    return coeffs_[idx];
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t index_of(std::span<const int> powers) const {
    if (powers.size() != 2 * degrees_.size())
      throw std::invalid_argument("PhaseSpaceState::at: wrong number of powers");
    std::size_t idx = 0;
    for (int m = 0; m < modes(); ++m) {
      const int x = powers[2 * m];
      const int p = powers[2 * m + 1];
      const int d = degrees_[m];
      if (x < 0 || p < 0 || x > d || p > d) return npos;
      idx = idx * local_size(m) + static_cast<std::size_t>(x * (d + 1) + p);
    }
    return idx;
  }

  std::vector<int> degrees_;
  std::vector<double> coeffs_;
  double weight_ = 1.0;
};

// ---------------------------------------------------------------------------
// Per-mode functionals: a value for every local monomial x^i p^j e^{-x^2-p^2},
// laid out as F[i * (d + 1) + j].

using ModeFunctional = std::vector<double>;

template <class FX, class FP>
ModeFunctional separable_functional(int d, FX fx, FP fp) {
  ModeFunctional f(static_cast<std::size_t>((d + 1) * (d + 1)));
  std::vector<double> px(d + 1), pp(d + 1);
  for (int k = 0; k <= d; ++k) {
    px[k] = fx(k);
    pp[k] = fp(k);
  }
  for (int i = 0; i <= d; ++i)
    for (int j = 0; j <= d; ++j) f[i * (d + 1) + j] = px[i] * pp[j];
  return f;
}

// Integrate the mode over the whole phase plane.
inline ModeFunctional trace_functional(int d) {
  return separable_functional(d, full_moment, full_moment);
}

// Integrate the momentum over R and the position over [-half_width, half_width].
inline ModeFunctional interval_functional(int d, double half_width) {
  return separable_functional(
      d, [&](int k) { return interval_moment(k, half_width); }, full_moment);
}

// Fix one quadrature to `value`, integrate the conjugate one.
inline ModeFunctional point_functional(int d, Quadrature which, double value) {
  const double g = std::exp(-value * value);
  auto point = [&](int k) { return ipow(value, k) * g; };
  if (which == Quadrature::Position) return separable_functional(d, point, full_moment);
  return separable_functional(d, full_moment, point);
}

// Tr(rho |0><0|) = 2 pi \int W (1/pi) e^{-x^2-p^2}.
inline ModeFunctional vacuum_functional(int d) {
  auto half = [](int k) { return std::sqrt(2.0) * centered_moment(k, 2.0); };
  return separable_functional(d, half, half);
}

// ---------------------------------------------------------------------------

namespace detail {

// Drops coefficients whose integrated magnitude |w_I| prod Gamma((i+1)/2)
// falls below `rel` times the largest one. Roundoff in exactly-cancelling
// terms would otherwise keep spurious high powers alive.
inline void flush_small(PhaseSpaceState& w, double rel = 1e-14) {
  const int k = w.modes();
  if (k == 0) return;
  std::vector<std::vector<double>> log_scale(k);
  for (int m = 0; m < k; ++m) {
    const int d = w.degree(m);
    log_scale[m].resize(w.local_size(m));
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j)
        log_scale[m][i * (d + 1) + j] = std::lgamma((i + 1) / 2.0) + std::lgamma((j + 1) / 2.0);
  }
  auto c = w.coeffs();
  std::vector<double> logc(c.size(), -kInf);
  double best = -kInf;
  std::vector<std::size_t> strides(k), sizes(k);
  for (int m = 0; m < k; ++m) {
    strides[m] = w.stride(m);
    sizes[m] = w.local_size(m);
  }
  for (std::size_t f = 0; f < c.size(); ++f) {
    if (c[f] == 0.0) continue;
    double s = std::log(std::abs(c[f]));
    for (int m = 0; m < k; ++m) s += log_scale[m][(f / strides[m]) % sizes[m]];
    logc[f] = s;
    best = std::max(best, s);
  }
  if (!std::isfinite(best)) return;
  const double cut = best + std::log(rel);
  for (std::size_t f = 0; f < c.size(); ++f)
    if (logc[f] < cut) c[f] = 0.0;
}

// out[o][l_new][in] = sum_l M[l_new][l_old] w[o][l_old][in] for one mode.
inline PhaseSpaceState apply_mode_matrix(const PhaseSpaceState& w, int mode, int new_degree,
                                         const std::vector<double>& matrix) {
  const std::size_t n_old = w.local_size(mode);
  const auto n_new = static_cast<std::size_t>((new_degree + 1) * (new_degree + 1));
  if (matrix.size() != n_new * n_old) throw std::logic_error("apply_mode_matrix: shape");
  auto degrees = w.degrees();
  degrees[mode] = new_degree;
  PhaseSpaceState out(degrees, w.weight());
  const std::size_t inner = w.stride(mode);
  const std::size_t outer = w.size() / (n_old * inner);
  const auto src = w.coeffs();
  auto dst = out.coeffs();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t lo = 0; lo < n_old; ++lo) {
      const double* s = &src[(o * n_old + lo) * inner];
      bool any = false;
      for (std::size_t t = 0; t < inner && !any; ++t) any = s[t] != 0.0;
      if (!any) continue;
      for (std::size_t ln = 0; ln < n_new; ++ln) {
        const double m = matrix[ln * n_old + lo];
        if (m == 0.0) continue;
        double* d = &dst[(o * n_new + ln) * inner];
        for (std::size_t t = 0; t < inner; ++t) d[t] += m * s[t];
      }
    }
  }
  return out;
}

// Kronecker product of an x-axis map and a p-axis map (rows = new power).
inline std::vector<double> kron_axis_maps(const std::vector<std::vector<double>>& mx,
                                          const std::vector<std::vector<double>>& mp, int d_old) {
  const auto rows = mx.size();
  const auto n_old = static_cast<std::size_t>((d_old + 1) * (d_old + 1));
  std::vector<double> m(rows * rows * n_old, 0.0);
  for (std::size_t u = 0; u < rows; ++u)
    for (std::size_t v = 0; v < rows; ++v)
      for (int i = 0; i <= d_old; ++i)
        for (int j = 0; j <= d_old; ++j)
          m[(u * rows + v) * n_old + i * (d_old + 1) + j] = mx[u][i] * mp[v][j];
  return m;
}

// Coefficient of u1^{s1} u2^{a+b-s1} in (c u1 + s u2)^a (c u2 - s u1)^b.
inline std::vector<double> rotation_expansion(int a, int b, double c, double s) {
  std::vector<double> e(a + b + 1, 0.0);
  for (int k = 0; k <= a; ++k) {
    const double ck = binomial(a, k) * ipow(c, k) * ipow(s, a - k);
    if (ck == 0.0) continue;
    for (int l = 0; l <= b; ++l) {
      const double cl = binomial(b, l) * ipow(-s, l) * ipow(c, b - l);
      e[k + l] += ck * cl;
    }
  }
  return e;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Construction

inline PhaseSpaceState vacuum() {
  PhaseSpaceState w({0});
  w.at({0, 0}) = 1.0 / kPi;
  return w;
}

inline PhaseSpaceState single_photon() {
  PhaseSpaceState w({2});
  w.at({0, 0}) = -1.0 / kPi;
  w.at({2, 0}) = 2.0 / kPi;
  w.at({0, 2}) = 2.0 / kPi;
  return w;
}

// Number states |0>, |1>, |2>.
inline PhaseSpaceState fock(int n) {
  switch (n) {
    case 0:
      return vacuum();
    case 1:
      return single_photon();
    case 2: {
      // (1/pi)(1 - 4 r^2 + 2 r^4) e^{-r^2}
      PhaseSpaceState w({4});
      w.at({0, 0}) = 1.0 / kPi;
      w.at({2, 0}) = -4.0 / kPi;
      w.at({0, 2}) = -4.0 / kPi;
      w.at({4, 0}) = 2.0 / kPi;
      w.at({0, 4}) = 2.0 / kPi;
      w.at({2, 2}) = 4.0 / kPi;
      return w;
    }
    default:
      throw std::invalid_argument("fock: only n <= 2 is supported");
  }
}

// ---------------------------------------------------------------------------
// Basic algebra

inline PhaseSpaceState tensor(const PhaseSpaceState& a, const PhaseSpaceState& b) {
  auto degrees = a.degrees();
  degrees.insert(degrees.end(), b.degrees().begin(), b.degrees().end());
  PhaseSpaceState out(degrees, a.weight() * b.weight());
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  auto co = out.coeffs();
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (ca[i] == 0.0) continue;
    for (std::size_t j = 0; j < cb.size(); ++j) co[i * cb.size() + j] = ca[i] * cb[j];
  }
  return out;
}

// Integrates one mode against a functional. The result is unnormalized and
// keeps the input weight.
inline PhaseSpaceState contract_mode(const PhaseSpaceState& w, int mode, const ModeFunctional& f) {
  if (mode < 0 || mode >= w.modes()) throw std::out_of_range("contract_mode: invalid mode");
  const std::size_t n = w.local_size(mode);
  if (f.size() != n) throw std::invalid_argument("contract_mode: functional size");
  auto degrees = w.degrees();
  degrees.erase(degrees.begin() + mode);
  PhaseSpaceState out(degrees, w.weight());
  const std::size_t inner = w.stride(mode);
  const std::size_t outer = w.size() / (n * inner);
  const auto src = w.coeffs();
  auto dst = out.coeffs();
  std::fill(dst.begin(), dst.end(), 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t l = 0; l < n; ++l) {
      if (f[l] == 0.0) continue;
      const double* s = &src[(o * n + l) * inner];
      double* d = &dst[o * inner];
      for (std::size_t t = 0; t < inner; ++t) d[t] += f[l] * s[t];
    }
  return out;
}

// Integral of the coefficient tensor over all phase-space variables.
inline double total_integral(const PhaseSpaceState& w) {
  PhaseSpaceState cur = w;
  while (cur.modes() > 0) {
    const int last = cur.modes() - 1;
    cur = contract_mode(cur, last, trace_functional(cur.degree(last)));
  }
  return cur.coeffs()[0];
}

inline double norm_integral(const PhaseSpaceState& w) { return total_integral(w); }

inline PhaseSpaceState normalized(PhaseSpaceState w) {
  const double t = total_integral(w);
  if (!(t > 0.0)) throw std::domain_error("normalized: non-positive total integral");
  for (auto& c : w.coeffs()) c /= t;
  return w;
}

// Shrinks each mode's degree to its highest nonzero power.
inline PhaseSpaceState trimmed(const PhaseSpaceState& w) {
  PhaseSpaceState cur = w;
  for (int m = 0; m < cur.modes(); ++m) {
    const int d = cur.degree(m);
    const std::size_t n = cur.local_size(m);
    const std::size_t inner = cur.stride(m);
    const std::size_t outer = cur.size() / (n * inner);
    int top = 0;
    const auto c = cur.coeffs();
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t t = 0; t < inner; ++t)
          if (c[(o * n + l) * inner + t] != 0.0) {
            top = std::max(top, static_cast<int>(std::max(l / (d + 1), l % (d + 1))));
          }
    if (top == d) continue;
    std::vector<double> sel(static_cast<std::size_t>((top + 1) * (top + 1)) * n, 0.0);
    for (int i = 0; i <= top; ++i)
      for (int j = 0; j <= top; ++j) sel[(i * (top + 1) + j) * n + i * (d + 1) + j] = 1.0;
    cur = detail::apply_mode_matrix(cur, m, top, sel);
  }
  return cur;
}

// Re-embeds one mode at a larger (or equal) degree with zero padding.
inline PhaseSpaceState with_degree(const PhaseSpaceState& w, int mode, int degree) {
  const int d = w.degree(mode);
  if (degree == d) return w;
  if (degree < d) throw std::invalid_argument("with_degree: cannot shrink");
  const std::size_t n = w.local_size(mode);
  std::vector<double> sel(static_cast<std::size_t>((degree + 1) * (degree + 1)) * n, 0.0);
  for (int i = 0; i <= d; ++i)
    for (int j = 0; j <= d; ++j) sel[(i * (degree + 1) + j) * n + i * (d + 1) + j] = 1.0;
  return detail::apply_mode_matrix(w, mode, degree, sel);
}

// W_out(.., u_i, .., u_j, ..) = W_in(.., c u_i + s u_j, .., c u_j - s u_i, ..)
// with c = cos(theta), s = sin(theta), identically for momenta. Both modes end
// with degree d_i + d_j.
inline PhaseSpaceState beam_splitter(const PhaseSpaceState& w, int i, int j, double theta) {
  if (i == j || i < 0 || j < 0 || i >= w.modes() || j >= w.modes())
    throw std::out_of_range("beam_splitter: invalid mode pair");
  if (i > j) return beam_splitter(w, j, i, -theta);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const int di = w.degree(i), dj = w.degree(j);
  const int dn = di + dj;
  const std::size_t ni = w.local_size(i), nj = w.local_size(j);
  const auto nn = static_cast<std::size_t>((dn + 1) * (dn + 1));

  std::vector<std::vector<std::vector<double>>> table(di + 1, std::vector<std::vector<double>>(dj + 1));
  for (int a = 0; a <= di; ++a)
    for (int b = 0; b <= dj; ++b) table[a][b] = detail::rotation_expansion(a, b, c, s);

  auto degrees = w.degrees();
  degrees[i] = dn;
  degrees[j] = dn;
  PhaseSpaceState out(degrees, w.weight());

  const std::size_t inner = w.stride(j);
  const std::size_t mid = w.stride(i) / (nj * inner);
  const std::size_t outer = w.size() / (ni * w.stride(i));
  const std::size_t out_inner = inner;
  const auto src = w.coeffs();
  auto dst = out.coeffs();

  const std::size_t D = dn + 1;
  // tmp[u1][c][u2][d]: x-axes rotated, momenta untouched.
  std::vector<double> tmp(D * (di + 1) * D * (dj + 1));
  std::vector<double> blk(nn * nn);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t md = 0; md < mid; ++md)
      for (std::size_t t = 0; t < inner; ++t) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        bool any = false;
        for (int a = 0; a <= di; ++a)
          for (int cp = 0; cp <= di; ++cp)
            for (int b = 0; b <= dj; ++b)
              for (int dp = 0; dp <= dj; ++dp) {
                const std::size_t li = a * (di + 1) + cp;
                const std::size_t lj = b * (dj + 1) + dp;
                const double v = src[(((o * ni + li) * mid + md) * nj + lj) * inner + t];
                if (v == 0.0) continue;
                any = true;
                const auto& e = table[a][b];
                for (int u1 = 0; u1 <= a + b; ++u1) {
                  if (e[u1] == 0.0) continue;
                  const int u2 = a + b - u1;
                  tmp[((u1 * (di + 1) + cp) * D + u2) * (dj + 1) + dp] += v * e[u1];
                }
              }
        if (!any) continue;
        std::fill(blk.begin(), blk.end(), 0.0);
        for (std::size_t u1 = 0; u1 < D; ++u1)
          for (int cp = 0; cp <= di; ++cp)
            for (std::size_t u2 = 0; u2 < D; ++u2)
              for (int dp = 0; dp <= dj; ++dp) {
                const double v = tmp[((u1 * (di + 1) + cp) * D + u2) * (dj + 1) + dp];
                if (v == 0.0) continue;
                const auto& e = table[cp][dp];
                for (int v1 = 0; v1 <= cp + dp; ++v1) {
                  if (e[v1] == 0.0) continue;
                  const int v2 = cp + dp - v1;
                  blk[(u1 * D + v1) * nn + u2 * D + v2] += v * e[v1];
                }
              }
        for (std::size_t l1 = 0; l1 < nn; ++l1)
          for (std::size_t l2 = 0; l2 < nn; ++l2) {
            const double v = blk[l1 * nn + l2];
            if (v != 0.0) dst[(((o * nn + l1) * mid + md) * nn + l2) * out_inner + t] = v;
          }
      }
  detail::flush_small(out);
  return trimmed(out);
}

// Pure-loss channel of transmission eta on one mode: mix with vacuum at
// cos(theta)^2 = eta and integrate the ancilla out.
inline PhaseSpaceState loss_channel(const PhaseSpaceState& w, int mode, double eta) {
  if (mode < 0 || mode >= w.modes()) throw std::out_of_range("loss_channel: invalid mode");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("loss_channel: eta outside [0,1]");
  const int d = w.degree(mode);
  const double c = std::sqrt(eta);
  const double s = std::sqrt(1.0 - eta);
  // x^a -> sum_k C(a,k) c^{a-k} s^k I(k) / sqrt(pi) x^{a-k}
  std::vector<std::vector<double>> axis(d + 1, std::vector<double>(d + 1, 0.0));
  for (int a = 0; a <= d; ++a)
    for (int k = 0; k <= a; k += 2)
      axis[a - k][a] += binomial(a, k) * ipow(c, a - k) * ipow(s, k) * full_moment(k) / kSqrtPi;
  auto out = detail::apply_mode_matrix(w, mode, d, detail::kron_axis_maps(axis, axis, d));
  detail::flush_small(out);
  return trimmed(out);
}

struct Conditioned {
  double probability;  // probability, or probability density for point outcomes
  PhaseSpaceState state;
};

inline PhaseSpaceState partial_trace(const PhaseSpaceState& w, int mode) {
  return normalized(contract_mode(w, mode, trace_functional(w.degree(mode))));
}

// Accepts position outcomes |x_mode| <= half_width, averaging over them.
inline Conditioned measure_x_interval(const PhaseSpaceState& w, int mode, double half_width) {
  if (!(half_width > 0.0)) throw std::invalid_argument("measure_x_interval: half-width must be positive");
  if (mode < 0 || mode >= w.modes()) throw std::out_of_range("measure_x_interval: invalid mode");
  auto raw = contract_mode(w, mode, interval_functional(w.degree(mode), half_width));
  const double prob = total_integral(raw) / total_integral(w);
  if (!(prob > 0.0)) return {0.0, raw};
  auto out = normalized(std::move(raw));
  out.set_weight(w.weight() * prob);
  detail::flush_small(out);
  return {prob, trimmed(out)};
}

// Conditions one quadrature of a mode on an exact outcome value.
inline Conditioned condition_quadrature(const PhaseSpaceState& w, int mode, Quadrature which,
                                        double value) {
  if (mode < 0 || mode >= w.modes()) throw std::out_of_range("condition_quadrature: invalid mode");
  auto raw = contract_mode(w, mode, point_functional(w.degree(mode), which, value));
  const double density = total_integral(raw) / total_integral(w);
  if (!(density > 0.0)) return {0.0, raw};
  auto out = normalized(std::move(raw));
  return {density, out};
}

inline PolyGaussDensity marginal_density(const PhaseSpaceState& w, int mode, Quadrature which) {
  if (mode < 0 || mode >= w.modes()) throw std::out_of_range("marginal_density: invalid mode");
  PhaseSpaceState cur = w;
  for (int m = cur.modes() - 1; m >= 0; --m)
    if (m != mode) cur = contract_mode(cur, m, trace_functional(cur.degree(m)));
  const int d = cur.degree(0);
  std::vector<double> c(d + 1, 0.0);
  for (int i = 0; i <= d; ++i)
    for (int j = 0; j <= d; ++j) {
      const double v = cur.coeffs()[i * (d + 1) + j];
      if (v == 0.0) continue;
      if (which == Quadrature::Position)
        c[i] += v * full_moment(j);
      else
        c[j] += v * full_moment(i);
    }
  return PolyGaussDensity(std::move(c)).normalized();
}

// Pointwise value; point = {x_0, p_0, x_1, p_1, ...}.
inline double evaluate(const PhaseSpaceState& w, std::span<const double> point) {
  if (point.size() != 2 * static_cast<std::size_t>(w.modes()))
    throw std::invalid_argument("evaluate: wrong number of coordinates");
  double acc = 0.0;
  double r2 = 0.0;
  for (double v : point) r2 += v * v;
  const auto c = w.coeffs();
  for (std::size_t f = 0; f < c.size(); ++f) {
    if (c[f] == 0.0) continue;
    double term = c[f];
    for (int m = 0; m < w.modes(); ++m) {
      const int d = w.degree(m);
      const std::size_t l = (f / w.stride(m)) % w.local_size(m);
      term *= ipow(point[2 * m], static_cast<int>(l / (d + 1))) *
              ipow(point[2 * m + 1], static_cast<int>(l % (d + 1)));
    }
    acc += term;
  }
  return acc * std::exp(-r2);
}

// (2 pi)^k \int W_a W_b = Tr(rho_a rho_b).
inline double overlap(const PhaseSpaceState& a, const PhaseSpaceState& b) {
  if (a.modes() != b.modes()) throw std::invalid_argument("overlap: mode-count mismatch");
  PhaseSpaceState mapped = b;
  for (int m = 0; m < a.modes(); ++m) {
    const int da = a.degree(m), db = b.degree(m);
    std::vector<std::vector<double>> g(da + 1, std::vector<double>(db + 1));
    for (int i = 0; i <= da; ++i)
      for (int k = 0; k <= db; ++k) g[i][k] = centered_moment(i + k, 2.0);
    mapped = detail::apply_mode_matrix(mapped, m, da, detail::kron_axis_maps(g, g, db));
  }
  double acc = 0.0;
  const auto ca = a.coeffs();
  const auto cm = mapped.coeffs();
  for (std::size_t f = 0; f < ca.size(); ++f) acc += ca[f] * cm[f];
  return acc * std::pow(2.0 * kPi, a.modes());
}

inline double purity(const PhaseSpaceState& w) { return overlap(w, w); }

// Plain-text coefficient matrix: row = x power, column = p power of the last
// mode, one block per nonzero combination of the leading modes' powers.
inline void dump(std::ostream& os, const PhaseSpaceState& w) {
  if (w.modes() == 0) {
    os << format_number(w.coeffs()[0]) << '\n';
    return;
  }
  const int last = w.modes() - 1;
  const int d = w.degree(last);
  const std::size_t n = w.local_size(last);
  const std::size_t blocks = w.size() / n;
  const auto c = w.coeffs();
  for (std::size_t b = 0; b < blocks; ++b) {
    bool any = false;
    for (std::size_t l = 0; l < n && !any; ++l) any = c[b * n + l] != 0.0;
    if (!any && blocks > 1) continue;
    if (blocks > 1) {
      os << "# leading powers";
      std::size_t rest = b;
      std::vector<std::string> parts;
      for (int m = last - 1; m >= 0; --m) {
        const std::size_t lm = rest % w.local_size(m);
        rest /= w.local_size(m);
        const int dm = w.degree(m);
        parts.push_back(" mode" + std::to_string(m) + "=(" + std::to_string(lm / (dm + 1)) + "," +
                        std::to_string(lm % (dm + 1)) + ")");
      }
      for (auto it = parts.rbegin(); it != parts.rend(); ++it) os << *it;
      os << '\n';
    }
    for (int i = 0; i <= d; ++i) {
      for (int j = 0; j <= d; ++j) {
        if (j) os << ' ';
        os << format_number(c[b * n + i * (d + 1) + j]);
      }
      os << '\n';
    }
  }
}

}  // namespace hqr
