// Pure reference states as sums of products of one-mode wavefunctions
//
//   psi(x) = sum c x^k exp(-alpha x^2 + beta x),
//
// plus the bridge to PhaseSpaceState: Wigner functions of states whose terms
// all carry the kernel Gaussian e^{-x^2/2}, and fidelities <T|rho|T> of any
// Wigner-represented rho against any target.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hqr/gaussian_integrals.hpp"
#include "hqr/phase_space_state.hpp"
#include "hqr/precise.hpp"

namespace hqr {

struct GaussTerm {
  cplx coeff;
  int power = 0;
  double alpha = 0.5;
  cplx beta = 0.0;
};

class Wavefunction {
 public:
  Wavefunction() = default;
  explicit Wavefunction(std::vector<GaussTerm> terms) : terms_(std::move(terms)) {}

  static Wavefunction monomial(int power, cplx coeff = 1.0, double alpha = 0.5, cplx beta = 0.0) {
    return Wavefunction({GaussTerm{coeff, power, alpha, beta}});
  }

  const std::vector<GaussTerm>& terms() const { return terms_; }

  cplx operator()(double x) const {
    cplx acc = 0.0;
    for (const auto& t : terms_) acc += t.coeff * ipow(x, t.power) * std::exp(-t.alpha * x * x + t.beta * x);
    return acc;
  }

  Wavefunction operator+(const Wavefunction& o) const {
    auto t = terms_;
    t.insert(t.end(), o.terms_.begin(), o.terms_.end());
    return Wavefunction(std::move(t));
  }

  Wavefunction operator*(cplx s) const {
    auto t = terms_;
    for (auto& g : t) g.coeff *= s;
    return Wavefunction(std::move(t));
  }

  // Coefficients of P when psi = P(x) e^{-x^2/2}; empty if some term has another Gaussian.
  std::optional<std::vector<cplx>> kernel_polynomial() const {
    int deg = 0;
    for (const auto& t : terms_) {
      if (t.alpha != 0.5 || t.beta != cplx(0.0)) return std::nullopt;
      deg = std::max(deg, t.power);
    }
    std::vector<cplx> p(deg + 1, 0.0);
    for (const auto& t : terms_) p[t.power] += t.coeff;
    return p;
  }

  // \int x^a e^{-x^2/2} psi(x) dx
  cplx kernel_moment(int a) const {
    cplx acc = 0.0;
    for (const auto& t : terms_) acc += t.coeff * shifted_moment(a + t.power, t.alpha + 0.5, t.beta);
    return acc;
  }

 private:
  std::vector<GaussTerm> terms_;
};

// <a|b>
inline cplx inner(const Wavefunction& a, const Wavefunction& b) {
  cplx acc = 0.0;
  for (const auto& s : a.terms())
    for (const auto& t : b.terms())
      acc += std::conj(s.coeff) * t.coeff *
             shifted_moment(s.power + t.power, s.alpha + t.alpha, std::conj(s.beta) + t.beta);
  return acc;
}

inline Wavefunction normalized(const Wavefunction& w) {
  const double n = std::sqrt(inner(w, w).real());
  if (!(n > 0.0)) throw std::domain_error("normalized: zero wavefunction");
  return w * cplx(1.0 / n);
}

struct ProductTerm {
  cplx amplitude;
  std::vector<Wavefunction> factors;
};

class TargetState {
 public:
  explicit TargetState(int modes) : modes_(modes) {}

  void add(cplx amplitude, std::vector<Wavefunction> factors) {
    if (static_cast<int>(factors.size()) != modes_)
      throw std::invalid_argument("TargetState::add: wrong number of factors");
    terms_.push_back({amplitude, std::move(factors)});
  }

  int modes() const { return modes_; }
  const std::vector<ProductTerm>& terms() const { return terms_; }

 private:
  int modes_;
  std::vector<ProductTerm> terms_;
};

inline TargetState single_mode(const Wavefunction& w) {
  TargetState t(1);
  t.add(1.0, {w});
  return t;
}

inline cplx inner(const TargetState& a, const TargetState& b) {
  if (a.modes() != b.modes()) throw std::invalid_argument("inner: mode-count mismatch");
  cplx acc = 0.0;
  for (const auto& s : a.terms())
    for (const auto& t : b.terms()) {
      cplx v = std::conj(s.amplitude) * t.amplitude;
      for (int m = 0; m < a.modes() && v != cplx(0.0); ++m) v *= inner(s.factors[m], t.factors[m]);
      acc += v;
    }
  return acc;
}

// |<a|b>|^2 for normalized copies of a and b.
inline double overlap(const TargetState& a, const TargetState& b) {
  return std::norm(inner(a, b)) / (inner(a, a).real() * inner(b, b).real());
}

// Purity of the reduced state of mode 0 of a normalized-or-not two-mode target.
inline double reduced_purity(const TargetState& t) {
  if (t.modes() != 2) throw std::invalid_argument("reduced_purity: two-mode state required");
  const auto n = static_cast<Eigen::Index>(t.terms().size());
  Eigen::MatrixXcd a(n, n), ga(n, n);
  for (Eigen::Index s = 0; s < n; ++s)
    for (Eigen::Index u = 0; u < n; ++u) {
      const auto& ts = t.terms()[s];
      const auto& tu = t.terms()[u];
      // rho_0 = sum_{s,u} A_su |a_s><a_u|
      a(s, u) = ts.amplitude * std::conj(tu.amplitude) * inner(tu.factors[1], ts.factors[1]);
      ga(s, u) = inner(ts.factors[0], tu.factors[0]);
    }
  const Eigen::MatrixXcd ag = a * ga;
  const cplx tr = ag.trace();
  return ((ag * ag).trace() / (tr * tr)).real();
}

// ---------------------------------------------------------------------------
// Wigner functions of kernel-compatible targets

namespace detail {

inline bool is_real(const Wavefunction& w) {
  for (const auto& t : w.terms())
    if (t.coeff.imag() != 0.0 || t.beta.imag() != 0.0) return false;
  return true;
}

inline bool is_real(const std::vector<cplx>& v) {
  for (const auto& c : v)
    if (c.imag() != 0.0) return false;
  return true;
}

// (-i)^n split as {real factor, imaginary factor}.
inline std::pair<int, int> minus_i_power(int n) {
  switch (n % 4) {
    case 0: return {1, 0};
    case 1: return {0, -1};
    case 2: return {-1, 0};
    default: return {0, 1};
  }
}

// cross_wigner for real polynomials, accumulated in extended precision.
inline std::vector<std::vector<cplx>> cross_wigner_precise(const std::vector<cplx>& p,
                                                           const std::vector<cplx>& q) {
  using precise::Real;
  const int dp = static_cast<int>(p.size()) - 1;
  const int dq = static_cast<int>(q.size()) - 1;
  const int d = dp + dq;
  std::vector<std::vector<Real>> c(d + 1, std::vector<Real>(d + 1, Real(0)));
  for (int a = 0; a <= dp; ++a) {
    if (p[a] == cplx(0.0)) continue;
    for (int b = 0; b <= dq; ++b) {
      if (q[b] == cplx(0.0)) continue;
      const Real pq = Real(p[a].real()) * Real(q[b].real());
      for (int e = 0; e <= a + b; ++e) {
        precise::Int acc = 0;
        for (int r = std::max(0, e - b); r <= std::min(a, e); ++r) {
          const int s = e - r;
          const precise::Int term = precise::exact_binomial(a, r) * precise::exact_binomial(b, s);
          acc += ((b - s) % 2 == 0) ? term : -term;
        }
        if (acc != 0) c[e][a + b - e] += pq * precise::to_real(acc);
      }
    }
  }
  std::vector<std::vector<Real>> re(d + 1, std::vector<Real>(d + 1, Real(0)));
  auto im = re;
  const Real inv_sqrt_pi = 1 / boost::multiprecision::sqrt(precise::pi());
  for (int f = 0; f <= d; ++f) {
    Real dfact = 1;
    for (int l = 0; 2 * l <= f; ++l) {
      if (l > 0) dfact *= (2 * l - 1);
      const Real w = precise::binomial(f, 2 * l) * dfact / precise::ipow(Real(2), l) * inv_sqrt_pi;
      const auto [pr, pi] = minus_i_power(f - 2 * l);
      for (int e = 0; e <= d; ++e) {
        if (c[e][f] == 0) continue;
        const Real v = c[e][f] * w;
        if (pr) re[e][f - 2 * l] += pr * v;
        if (pi) im[e][f - 2 * l] += pi * v;
      }
    }
  }
  std::vector<std::vector<cplx>> out(d + 1, std::vector<cplx>(d + 1, 0.0));
  for (int e = 0; e <= d; ++e)
    for (int f = 0; f <= d; ++f) out[e][f] = {static_cast<double>(re[e][f]), static_cast<double>(im[e][f])};
  return out;
}

// Cross Wigner function of |psi><phi| for psi = P e^{-x^2/2}, phi = Q e^{-x^2/2},
// as complex coefficients cw[e][f] of x^e p^f e^{-x^2-p^2}.
inline std::vector<std::vector<cplx>> cross_wigner(const std::vector<cplx>& p,
                                                   const std::vector<cplx>& q) {
  const int dp = static_cast<int>(p.size()) - 1;
  const int dq = static_cast<int>(q.size()) - 1;
  const int d = dp + dq;
  // P(x+z) conj(Q(x-z)) = sum C[e][f] x^e z^f
  std::vector<std::vector<cplx>> c(d + 1, std::vector<cplx>(d + 1, 0.0));
  for (int a = 0; a <= dp; ++a) {
    if (p[a] == cplx(0.0)) continue;
    for (int b = 0; b <= dq; ++b) {
      if (q[b] == cplx(0.0)) continue;
      const cplx pq = p[a] * std::conj(q[b]);
      for (int r = 0; r <= a; ++r)
        for (int s = 0; s <= b; ++s) {
          const double sign = ((b - s) % 2 == 0) ? 1.0 : -1.0;
          c[r + s][a - r + b - s] += pq * binomial(a, r) * binomial(b, s) * sign;
        }
    }
  }
  std::vector<std::vector<cplx>> w(d + 1, std::vector<cplx>(d + 1, 0.0));
  const cplx mi(0.0, -1.0);
  for (int e = 0; e <= d; ++e)
    for (int f = 0; f <= d; ++f) {
      if (c[e][f] == cplx(0.0)) continue;
      for (int l = 0; 2 * l <= f; ++l)
        w[e][f - 2 * l] += c[e][f] * binomial(f, 2 * l) * ipow(mi, f - 2 * l) *
                           odd_double_factorial(l) / std::ldexp(1.0, l) / kSqrtPi;
    }
  return w;
}

}  // namespace detail

inline PhaseSpaceState wigner(const TargetState& t) {
  const int k = t.modes();
  std::vector<std::vector<std::vector<cplx>>> polys;
  std::vector<int> deg(k, 0);
  for (const auto& term : t.terms()) {
    std::vector<std::vector<cplx>> per;
    for (int m = 0; m < k; ++m) {
      auto p = term.factors[m].kernel_polynomial();
      if (!p) throw std::invalid_argument("wigner: factor not of the form P(x) e^{-x^2/2}");
      deg[m] = std::max(deg[m], 2 * (static_cast<int>(p->size()) - 1));
      per.push_back(std::move(*p));
    }
    polys.push_back(std::move(per));
  }
  PhaseSpaceState out(deg);
  std::vector<cplx> acc(out.size(), 0.0);
  const auto& terms = t.terms();
  for (std::size_t s = 0; s < terms.size(); ++s)
    for (std::size_t u = 0; u < terms.size(); ++u) {
      const cplx amp = terms[s].amplitude * std::conj(terms[u].amplitude);
      if (amp == cplx(0.0)) continue;
      // Product over modes of cross Wigner functions, laid out like `out`.
      std::vector<cplx> prod{amp};
      for (int m = 0; m < k; ++m) {
        const auto cw = detail::is_real(polys[s][m]) && detail::is_real(polys[u][m])
                             ? detail::cross_wigner_precise(polys[s][m], polys[u][m])
                             : detail::cross_wigner(polys[s][m], polys[u][m]);
        const int dm = deg[m];
        const int dc = static_cast<int>(cw.size()) - 1;
        std::vector<cplx> next(prod.size() * (dm + 1) * (dm + 1), 0.0);
        for (std::size_t o = 0; o < prod.size(); ++o) {
          if (prod[o] == cplx(0.0)) continue;
          for (int e = 0; e <= dc; ++e)
            for (int f = 0; f <= dc; ++f)
              if (cw[e][f] != cplx(0.0)) next[(o * (dm + 1) + e) * (dm + 1) + f] += prod[o] * cw[e][f];
        }
        prod.swap(next);
      }
      for (std::size_t f = 0; f < acc.size(); ++f) acc[f] += prod[f];
    }
  auto c = out.coeffs();
  for (std::size_t f = 0; f < acc.size(); ++f) c[f] = acc[f].real();
  detail::flush_small(out);
  return normalized(trimmed(out));
}

// ---------------------------------------------------------------------------
// Fidelity functionals

// K[i][j] = 2 pi \int x^i p^j e^{-x^2-p^2} W_{|t><s|}(x, p) dx dp for i, j <= d.
// With u = x + y/2, v = x - y/2 this is
//   sqrt(pi) \int\int ((u+v)/2)^i G_j(u-v) e^{-u^2/2} t(u) e^{-v^2/2} conj(s(v)),
// where \int p^j e^{-p^2 - i p y} dp = sqrt(pi) e^{-y^2/4} G_j(y).
namespace detail {

inline std::vector<cplx> cross_kernel_double(const Wavefunction& t, const Wavefunction& s, int d) {
  const int top = 2 * d;
  std::vector<cplx> mt(top + 1), ms(top + 1);
  for (int a = 0; a <= top; ++a) {
    mt[a] = t.kernel_moment(a);
    ms[a] = std::conj(s.kernel_moment(a));
  }
  // M[i][k] = \int\int ((u+v)/2)^i (u-v)^k e^{..} t(u) conj(s(v)) du dv
  std::vector<cplx> mm(static_cast<std::size_t>((d + 1) * (d + 1)), 0.0);
  for (int i = 0; i <= d; ++i)
    for (int k = 0; k <= d; ++k) {
      cplx acc = 0.0;
      for (int r = 0; r <= i; ++r)
        for (int q = 0; q <= k; ++q) {
          const double sign = ((k - q) % 2 == 0) ? 1.0 : -1.0;
          acc += binomial(i, r) * binomial(k, q) * sign * mt[r + q] * ms[i - r + k - q];
        }
      mm[i * (d + 1) + k] = acc / std::ldexp(1.0, i);
    }
  std::vector<cplx> kern(static_cast<std::size_t>((d + 1) * (d + 1)), 0.0);
  for (int j = 0; j <= d; ++j) {
    const auto g = fourier_moment_poly(j, 1.0, cplx(0.0, -1.0));
    for (int i = 0; i <= d; ++i) {
      cplx acc = 0.0;
      for (int k = 0; k <= j; ++k)
        if (g[k] != cplx(0.0)) acc += g[k] * mm[i * (d + 1) + k];
      kern[i * (d + 1) + j] = kSqrtPi * acc;
    }
  }
  return kern;
}


// Same kernel for real wavefunctions, accumulated in extended precision.
inline std::vector<cplx> cross_kernel_precise(const Wavefunction& t, const Wavefunction& s, int d) {
  using precise::Real;
  const int top = 2 * d;
  auto moments = [top](const Wavefunction& w) {
    std::vector<Real> m(top + 1, Real(0));
    for (const auto& g : w.terms()) {
      const Real c = g.coeff.real();
      for (int a = 0; a <= top; ++a)
        m[a] += c * precise::shifted_moment(a + g.power, Real(g.alpha) + Real(0.5), Real(g.beta.real()));
    }
    return m;
  };
  const auto mt = moments(t);
  const auto ms = moments(s);
  std::vector<Real> mm(static_cast<std::size_t>((d + 1) * (d + 1)), Real(0));
  for (int i = 0; i <= d; ++i) {
    const Real scale = 1 / precise::ipow(Real(2), i);
    for (int k = 0; k <= d; ++k) {
      Real acc = 0;
      for (int r = 0; r <= i; ++r) {
        const Real br = precise::binomial(i, r);
        for (int q = 0; q <= k; ++q) {
          const Real v = br * precise::binomial(k, q) * mt[r + q] * ms[i - r + k - q];
          if ((k - q) % 2 == 0)
            acc += v;
          else
            acc -= v;
        }
      }
      mm[i * (d + 1) + k] = acc * scale;
    }
  }
  const Real sqrt_pi = boost::multiprecision::sqrt(precise::pi());
  std::vector<cplx> kern(static_cast<std::size_t>((d + 1) * (d + 1)), 0.0);
  for (int j = 0; j <= d; ++j) {
    std::vector<Real> w;
    Real dfact = 1;
    for (int l = 0; 2 * l <= j; ++l) {
      if (l > 0) dfact *= (2 * l - 1);
      w.push_back(precise::binomial(j, 2 * l) * dfact / precise::ipow(Real(2), j - l));
    }
    for (int i = 0; i <= d; ++i) {
      Real re = 0, im = 0;
      for (int l = 0; 2 * l <= j; ++l) {
        const auto [pr, pi] = minus_i_power(j - 2 * l);
        const Real v = w[l] * mm[i * (d + 1) + j - 2 * l];
        if (pr) re += pr * v;
        if (pi) im += pi * v;
      }
      kern[i * (d + 1) + j] = {static_cast<double>(sqrt_pi * re), static_cast<double>(sqrt_pi * im)};
    }
  }
  return kern;
}

}  // namespace detail

// Above this degree the double-precision expansion loses too many digits.
inline constexpr int kPreciseKernelDegree = 20;

inline std::vector<cplx> cross_kernel(const Wavefunction& t, const Wavefunction& s, int d) {
  if (d > kPreciseKernelDegree && detail::is_real(t) && detail::is_real(s))
    return detail::cross_kernel_precise(t, s, d);
  return detail::cross_kernel_double(t, s, d);
}

// sum_I w_I prod_m K_m[I_m] with complex per-mode kernels.
inline cplx contract_all(const PhaseSpaceState& w, const std::vector<const std::vector<cplx>*>& kernels) {
  const auto c = w.coeffs();
  std::vector<cplx> cur(c.begin(), c.end());
  for (int m = w.modes() - 1; m >= 0; --m) {
    const auto& kern = *kernels[m];
    const std::size_t n = w.local_size(m);
    std::vector<cplx> next(cur.size() / n, 0.0);
    for (std::size_t o = 0; o < next.size(); ++o) {
      cplx acc = 0.0;
      for (std::size_t l = 0; l < n; ++l) acc += kern[l] * cur[o * n + l];
      next[o] = acc;
    }
    cur.swap(next);
  }
  return cur[0];
}

// Matrix elements <s|rho|t> in a product basis given per mode. Rows and
// columns enumerate basis products with the last mode fastest.
inline Eigen::MatrixXcd density_matrix_in_basis(const PhaseSpaceState& w,
                                                const std::vector<std::vector<Wavefunction>>& basis) {
  const int k = w.modes();
  if (static_cast<int>(basis.size()) != k) throw std::invalid_argument("density_matrix_in_basis: modes");
  // kern[m][t * n + s] = K^{t, s}
  std::vector<std::vector<std::vector<cplx>>> kern(k);
  Eigen::Index dim = 1;
  for (int m = 0; m < k; ++m) {
    const auto n = basis[m].size();
    dim *= static_cast<Eigen::Index>(n);
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t s = 0; s < n; ++s)
        kern[m].push_back(cross_kernel(basis[m][t], basis[m][s], w.degree(m)));
  }
  Eigen::MatrixXcd rho(dim, dim);
  std::vector<const std::vector<cplx>*> sel(k);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index col = 0; col < dim; ++col) {
      Eigen::Index rr = r, cc = col;
      for (int m = k - 1; m >= 0; --m) {
        const auto n = static_cast<Eigen::Index>(basis[m].size());
        const auto s = rr % n, t = cc % n;
        rr /= n;
        cc /= n;
        sel[m] = &kern[m][static_cast<std::size_t>(t * n + s)];
      }
      rho(r, col) = contract_all(w, sel);
    }
  return rho;
}

// <T|rho|T> / <T|T>.
inline double fidelity(const PhaseSpaceState& w, const TargetState& target) {
  if (w.modes() != target.modes()) throw std::invalid_argument("fidelity: mode-count mismatch");
  const auto& terms = target.terms();
  const int k = w.modes();
  cplx acc = 0.0;
  std::vector<std::vector<cplx>> kern(k);
  std::vector<const std::vector<cplx>*> sel(k);
  for (const auto& s : terms)
    for (const auto& t : terms) {
      for (int m = 0; m < k; ++m) {
        kern[m] = cross_kernel(t.factors[m], s.factors[m], w.degree(m));
        sel[m] = &kern[m];
      }
      acc += std::conj(s.amplitude) * t.amplitude * contract_all(w, sel);
    }
  return acc.real() / inner(target, target).real();
}

// ---------------------------------------------------------------------------
// Reference states

namespace targets {

// x^{2^m} e^{-x^2/2}, the ideal output of m growth iterations.
inline Wavefunction ideal_grown(int m) {
  return Wavefunction::monomial(1 << m, 1.0 / std::sqrt(std::tgamma((1 << m) + 0.5)));
}

// Logical basis: |1_m> = ideal_grown(m), |0_m> ~ a|1_m> ~ x^{2^m - 1} e^{-x^2/2}.
inline Wavefunction logical_one(int m) { return ideal_grown(m); }
inline Wavefunction logical_zero(int m) {
  return Wavefunction::monomial((1 << m) - 1, 1.0 / std::sqrt(std::tgamma((1 << m) - 0.5)));
}

// (|0_m 1_m> + |1_m 0_m>) / sqrt(2)
inline TargetState psi_m(int m) {
  TargetState t(2);
  t.add(1.0 / std::sqrt(2.0), {logical_zero(m), logical_one(m)});
  t.add(1.0 / std::sqrt(2.0), {logical_one(m), logical_zero(m)});
  return t;
}

// sum_{ab} T(a, b) |a_m b_m>, a, b in {0, 1}.
inline TargetState logical_two_mode(int m, const Eigen::Matrix2cd& tm) {
  const Wavefunction basis[2] = {logical_zero(m), logical_one(m)};
  TargetState t(2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (tm(a, b) != cplx(0.0)) t.add(tm(a, b), {basis[a], basis[b]});
  return t;
}

// e^{-(x - c)^2} with the phase convention used for squeezed coherent states.
inline Wavefunction squeezed_coherent(double center, cplx coeff = 1.0) {
  return Wavefunction::monomial(0, coeff * std::exp(-center * center), 1.0, 2.0 * center);
}

// Even cat squeezed by two in x-variance: e^{-(x-mu)^2} + e^{-(x+mu)^2}, mu = sqrt(2^m + 1/2).
inline Wavefunction squeezed_single_cat(int m, bool odd = false) {
  const double mu = std::sqrt((1 << m) + (odd ? -0.5 : 0.5));
  return normalized(squeezed_coherent(mu) + squeezed_coherent(-mu, odd ? -1.0 : 1.0));
}

// Locally squeezed two-mode cat e^{i theta}|a, a> + e^{-i theta}|-a, -a>
// with |a> -> e^{-(x - 2^{m/2})^2} after the squeezing.
inline TargetState squeezed_two_mode_cat(int m, double theta) {
  const double a = std::pow(2.0, m / 2.0);
  TargetState t(2);
  const cplx ph = std::polar(1.0, theta);
  t.add(ph, {squeezed_coherent(a), squeezed_coherent(a)});
  t.add(std::conj(ph), {squeezed_coherent(-a), squeezed_coherent(-a)});
  return t;
}

// Coherent state |alpha> for real alpha: pi^{-1/4} e^{-(x - sqrt(2) alpha)^2 / 2}.
inline Wavefunction coherent(double alpha) {
  return Wavefunction::monomial(0, std::pow(kPi, -0.25) * std::exp(-alpha * alpha), 0.5,
                                std::sqrt(2.0) * alpha);
}

}  // namespace targets

}  // namespace hqr
