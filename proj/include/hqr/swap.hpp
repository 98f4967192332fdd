// Entanglement swapping: mode 1 of a left pair and mode 0 of a right pair meet
// on a balanced beam splitter; X is measured on the output carrying the left
// coordinate, P on the other. The outer memories keep the swapped state.
//
// Beam splitter coordinates: the left mode sees (u + v)/sqrt2 and the right mode
// (v - u)/sqrt2, u and v being the X-measured and P-measured outputs.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hqr/bridge.hpp"
#include "hqr/parallel.hpp"
#include "hqr/sampling.hpp"
#include "hqr/target_state.hpp"

namespace hqr {

namespace detail {

inline const FixedAxisPoly& cached_fixed_axis(int da, int db, Output fixed) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const FixedAxisPoly>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{da, db, static_cast<int>(fixed)}];
  if (!slot) slot = std::make_shared<const FixedAxisPoly>(fixed_axis_poly(da, db, fixed));
  return *slot;
}

inline const AxisKernel& cached_integrated_axis(int da, int db) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const AxisKernel>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{da, db}];
  if (!slot) slot = std::make_shared<const AxisKernel>(integrated_axis_kernel(da, db, 1.0, 1.0));
  return *slot;
}

// B[k][k'] = sum_{l, l'} a[k][l] K[l][l'] b[k'][l']: contracts the momentum
// (or, with `momentum` false, the position) axis of the two reduced modes.
inline std::vector<double> contract_axis(const std::vector<double>& a, int da, const std::vector<double>& b, int db,
                                         const AxisKernel& k, bool momentum) {
  auto get = [](const std::vector<double>& v, int d, int keep, int sum, bool mom) {
    return mom ? v[keep * (d + 1) + sum] : v[sum * (d + 1) + keep];
  };
  std::vector<double> out(static_cast<std::size_t>((da + 1) * (db + 1)), 0.0);
  std::vector<double> tmp(static_cast<std::size_t>(db + 1));
  for (int i = 0; i <= da; ++i) {
    // tmp[l'] = sum_l a[i][l] K[l][l']
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (int l = 0; l <= da; ++l) {
      const double av = get(a, da, i, l, momentum);
      if (av == 0.0) continue;
      for (int lp = 0; lp <= db; ++lp) tmp[lp] += av * k[l * (db + 1) + lp];
    }
    for (int ip = 0; ip <= db; ++ip) {
      double acc = 0.0;
      for (int lp = 0; lp <= db; ++lp) acc += tmp[lp] * get(b, db, ip, lp, momentum);
      out[i * (db + 1) + ip] = acc;
    }
  }
  return out;
}

}  // namespace detail

// Everything needed to draw swap outcomes for one pair of input states.
class SwapMeasurement {
 public:
  SwapMeasurement(const PhaseSpaceState& left, const PhaseSpaceState& right) : left_(left), right_(right) {
    if (left.modes() != 2 || right.modes() != 2) throw std::invalid_argument("swap: two-mode inputs required");
    da_ = left.degree(1);
    db_ = right.degree(0);
    la_ = reduce_to_mode(left, 1);
    rb_ = reduce_to_mode(right, 0);
    norm_ = total_integral(left) * total_integral(right);
    fx_ = &detail::cached_fixed_axis(da_, db_, Output::Left);
    fp_ = &detail::cached_fixed_axis(da_, db_, Output::Right);
    const auto b = detail::contract_axis(la_, da_, rb_, db_, detail::cached_integrated_axis(da_, db_), true);
    auto xd = fx_->contract(b);
    std::vector<double> c(xd.coeffs().begin(), xd.coeffs().end());
    for (auto& v : c) v /= norm_;
    x_density_ = PolyGaussDensity(std::move(c));
  }

  // Density of the X outcome over the real line.
  const PolyGaussDensity& x_density() const { return x_density_; }

  double success_probability(double delta) const {
    if (!(delta >= 0.0)) throw std::invalid_argument("swap: acceptance half-width must be non-negative");
    if (delta == 0.0) return 0.0;
    return x_density_.mass(-delta, delta);
  }

  // Density of the P outcome jointly with X = x0 (integrates to x_density()(x0)).
  PolyGaussDensity p_density(double x0) const {
    const auto kx = fx_->at(x0);
    const auto a = detail::contract_axis(la_, da_, rb_, db_, kx, false);
    auto pd = fp_->contract(a);
    std::vector<double> c(pd.coeffs().begin(), pd.coeffs().end());
    for (auto& v : c) v /= norm_;
    return PolyGaussDensity(std::move(c));
  }

  // Normalized state of (left mode 0, right mode 1) after outcomes (x0, p0).
  PhaseSpaceState conditional_state(double x0, double p0) const {
    auto raw = contract_pair(left_, 1, right_, 0, {{1.0, fx_->at(x0), fp_->at(p0)}});
    return normalized(std::move(raw));
  }

 private:
  PhaseSpaceState left_, right_;
  int da_ = 0, db_ = 0;
  std::vector<double> la_, rb_;
  double norm_ = 1.0;
  const FixedAxisPoly* fx_ = nullptr;
  const FixedAxisPoly* fp_ = nullptr;
  PolyGaussDensity x_density_;
};

struct SwapOutcome {
  double x0 = 0.0;
  double p0 = 0.0;
  bool accepted = false;
  std::optional<PhaseSpaceState> state;
  int draws = 0;  // X outcomes drawn, the last one accepted
};

inline constexpr double kMinSwapAcceptance = 1e-6;

// Draws X outcomes until one falls in [-delta, delta], then P given X.
inline SwapOutcome swap_once(const SwapMeasurement& meas, double delta, Rng& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("swap: acceptance half-width must be positive");
  if (meas.success_probability(delta) < kMinSwapAcceptance)
    throw std::domain_error("swap: acceptance probability below 1e-6");
  SwapOutcome o;
  for (;;) {
    ++o.draws;
    o.x0 = sample(meas.x_density(), rng);
    if (std::abs(o.x0) <= delta) break;
  }
  o.accepted = true;
  o.p0 = sample(meas.p_density(o.x0), rng);
  o.state = meas.conditional_state(o.x0, o.p0);
  return o;
}

inline SwapOutcome swap_once(const PhaseSpaceState& left, const PhaseSpaceState& right, double delta, Rng& rng) {
  return swap_once(SwapMeasurement(left, right), delta, rng);
}

inline double success_probability(const PhaseSpaceState& left, const PhaseSpaceState& right, double delta) {
  return SwapMeasurement(left, right).success_probability(delta);
}

// ---------------------------------------------------------------------------
// Target family. A two-mode logical state sum_{ab} M[a][b] |a_m b_m> with
// M = alpha I + beta X (X the bit flip). Swapping two such states with the
// cat approximations of |0_m>, |1_m> multiplies their matrices with the
// outcome matrix T = 2 cos(theta) I - i kappa(x0) sin(theta) X, theta standing
// in for sqrt2 mu_m p0. Products stay in the family and Re(alpha conj(beta))
// stays zero, so every member carries one ebit.

struct PairMatrix {
  cplx alpha = 0.0;
  cplx beta = 0.0;

  PairMatrix operator*(const PairMatrix& o) const {
    return {alpha * o.alpha + beta * o.beta, alpha * o.beta + beta * o.alpha};
  }

  PairMatrix normalized() const {
    const double n = std::sqrt(2.0 * (std::norm(alpha) + std::norm(beta)));
    return {alpha / n, beta / n};
  }

  // Amplitudes on |00>, |01>, |10>, |11>.
  std::array<cplx, 4> amplitudes() const { return {alpha, beta, beta, alpha}; }
};

// psi_m: (|0 1> + |1 0>) / sqrt2.
inline PairMatrix psi_pair() { return {0.0, 1.0 / std::sqrt(2.0)}; }

inline double cat_kappa(int m, double x0) {
  const double mu = std::sqrt((1 << m) + 0.5);
  const double mu_t = std::sqrt((1 << m) - 0.5);
  return 2.0 * std::cosh(std::sqrt(2.0) * x0 * (mu - mu_t)) * std::exp(-0.5 * (mu - mu_t) * (mu - mu_t));
}

// alpha = A cos + B sin, beta = C cos + D sin.
struct SwapTargetCoeffs {
  cplx A = 0.0, B = 0.0, C = 0.0, D = 0.0;

  PairMatrix at(double theta) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return PairMatrix{A * c + B * s, C * c + D * s}.normalized();
  }
};

// Folds the two parent states and this level's X outcome into the family.
inline SwapTargetCoeffs fold_swap(const PairMatrix& left, const PairMatrix& right, int m, double x0) {
  const PairMatrix p = left * right;
  const cplx k(0.0, -cat_kappa(m, x0));
  return {2.0 * p.alpha, k * p.beta, 2.0 * p.beta, k * p.alpha};
}

inline TargetState phi_target(int m, const PairMatrix& pm) {
  Eigen::Matrix2cd t;
  const auto a = pm.amplitudes();
  t << a[0], a[1], a[2], a[3];
  return targets::logical_two_mode(m, t);
}

namespace detail {

// K^{t,s} for t, s in {|0_m>, |1_m>} at a given degree, cached.
inline const std::array<std::vector<cplx>, 4>& logical_kernels(int m, int degree) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const std::array<std::vector<cplx>, 4>>> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find({m, degree});
    if (it != cache.end()) return *it->second;
  }
  const Wavefunction basis[2] = {targets::logical_zero(m), targets::logical_one(m)};
  auto k = std::make_shared<std::array<std::vector<cplx>, 4>>();
  for (int t = 0; t < 2; ++t)
    for (int s = 0; s < 2; ++s) (*k)[t * 2 + s] = cross_kernel(basis[t], basis[s], degree);
  std::lock_guard lock(mu);
  auto& slot = cache[{m, degree}];
  if (!slot) slot = k;
  return *slot;
}

}  // namespace detail

// <s|rho|t> over the logical product basis |00>, |01>, |10>, |11>.
inline Eigen::Matrix4cd logical_density_matrix(const PhaseSpaceState& w, int m) {
  if (w.modes() != 2) throw std::invalid_argument("logical_density_matrix: two-mode state required");
  const auto& k0 = detail::logical_kernels(m, w.degree(0));
  const auto& k1 = detail::logical_kernels(m, w.degree(1));
  const auto c = w.coeffs();
  const std::size_t n0 = w.local_size(0), n1 = w.local_size(1);
  // Mode 1 first: v[q][o] = sum_l K1_q[l] w[o][l].
  std::array<std::vector<cplx>, 4> v;
  for (int q = 0; q < 4; ++q) {
    v[q].assign(n0, 0.0);
    for (std::size_t o = 0; o < n0; ++o) {
      cplx acc = 0.0;
      for (std::size_t l = 0; l < n1; ++l) acc += k1[q][l] * c[o * n1 + l];
      v[q][o] = acc;
    }
  }
  Eigen::Matrix4cd rho;
  for (int r = 0; r < 4; ++r)
    for (int col = 0; col < 4; ++col) {
      const auto& ka = k0[(col / 2) * 2 + r / 2];
      const auto& vb = v[(col % 2) * 2 + r % 2];
      cplx acc = 0.0;
      for (std::size_t o = 0; o < n0; ++o) acc += ka[o] * vb[o];
      rho(r, col) = acc;
    }
  return rho / total_integral(w);
}

inline double family_fidelity(const Eigen::Matrix4cd& rho, const PairMatrix& pm) {
  const auto a = pm.amplitudes();
  Eigen::Vector4cd v(a[0], a[1], a[2], a[3]);
  return (v.adjoint() * rho * v)(0, 0).real() / v.squaredNorm();
}

struct TargetFit {
  double fidelity = 0.0;
  double theta = 0.0;
  PairMatrix target;
};

inline constexpr int kThetaGrid = 720;

// Maximizes the fidelity over theta in [0, 2 pi): grid, then Brent refinement.
inline TargetFit target_fidelity(const Eigen::Matrix4cd& rho, const SwapTargetCoeffs& coeffs,
                                 int grid = kThetaGrid) {
  auto f = [&](double th) { return family_fidelity(rho, coeffs.at(th)); };
  const double step = 2.0 * kPi / grid;
  int best = 0;
  double best_f = -1.0;
  for (int i = 0; i < grid; ++i) {
    const double v = f(i * step);
    if (v > best_f) {
      best_f = v;
      best = i;
    }
  }
  const double lo = (best - 1) * step, hi = (best + 1) * step;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::brent_find_minima([&](double th) { return -f(th); }, lo, hi, 40, iters);
  TargetFit out;
  out.theta = -r.second > best_f ? r.first : best * step;
  out.theta = std::fmod(out.theta + 2.0 * kPi, 2.0 * kPi);
  out.fidelity = std::max(best_f, -r.second);
  out.target = coeffs.at(out.theta);
  return out;
}

inline TargetFit target_fidelity(const PhaseSpaceState& w, int m, const SwapTargetCoeffs& coeffs,
                                 int grid = kThetaGrid) {
  return target_fidelity(logical_density_matrix(w, m), coeffs, grid);
}

// The phase the cat approximation assigns to a P outcome: theta = sqrt2 mu_m p0.
inline double cat_phase(int m, double p0) { return std::sqrt(2.0 * ((1 << m) + 0.5)) * p0; }

// Fidelity against the family member fixed by the outcome itself, no search.
inline double fixed_phase_fidelity(const Eigen::Matrix4cd& rho, const SwapTargetCoeffs& coeffs, int m, double p0) {
  return family_fidelity(rho, coeffs.at(cat_phase(m, p0)));
}

struct PCurvePoint {
  double p0 = 0.0;
  double density = 0.0;      // joint density of (x0, p0)
  double conditional = 0.0;  // density of p0 given x0
  double optimized = 0.0;    // theta searched
  double fixed = 0.0;        // theta = cat_phase(m, p0)
};

// Fidelity against P outcome at fixed X outcome, for two copies of one pair
// with target matrix pm.
inline std::vector<PCurvePoint> swap_p_curve(const SwapMeasurement& meas, int m, const PairMatrix& pm, double x0,
                                             const std::vector<double>& ps, unsigned threads = 0) {
  const auto pd = meas.p_density(x0);
  const double px = pd.total_mass();
  const auto coeffs = fold_swap(pm, pm, m, x0);
  std::vector<PCurvePoint> out(ps.size());
  parallel_for(ps.size(), threads, [&](std::size_t i) {
    const auto rho = logical_density_matrix(meas.conditional_state(x0, ps[i]), m);
    out[i] = {ps[i], pd(ps[i]), pd(ps[i]) / px, target_fidelity(rho, coeffs).fidelity,
              fixed_phase_fidelity(rho, coeffs, m, ps[i])};
  });
  return out;
}

// Central interval of the P outcome holding `mass` of its conditional probability.
inline std::pair<double, double> central_p_window(const SwapMeasurement& meas, double x0, double mass = 0.9) {
  const auto pd = meas.p_density(x0);
  const double total = pd.total_mass();
  const double tail = 0.5 * (1.0 - mass) * total;
  auto quantile = [&](double target) {
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve([&](double p) { return pd.mass(-60.0, p) - target; }, -60.0,
                                                     60.0, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
  };
  return {quantile(tail), quantile(total - tail)};
}

// No history: the state is scored against psi_m itself.
inline double pair_fidelity(const PhaseSpaceState& w, int m, const PairMatrix& pm) {
  return family_fidelity(logical_density_matrix(w, m), pm);
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct SwapSample {
  int level = 1;
  double x0 = 0.0;
  double p0 = 0.0;
  int draws = 0;
  double fidelity = 0.0;
  double theta = 0.0;
};

struct SwapAverage {
  double mean = 0.0;
  double sem = 0.0;
  double p_success = 0.0;
  std::vector<SwapSample> samples;
};

inline void mean_and_sem(SwapAverage& out) {
  const auto n = static_cast<double>(out.samples.size());
  double mean = 0.0;
  for (const auto& s : out.samples) mean += s.fidelity;
  mean /= n;
  double var = 0.0;
  for (const auto& s : out.samples) var += (s.fidelity - mean) * (s.fidelity - mean);
  out.mean = mean;
  out.sem = n > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
}

// One swap of `left` and `right` (with target matrices pl, pr), averaged over
// `samples` accepted outcomes. Sample i draws from derive_seed(seed, i).
inline SwapAverage mc_average_fidelity(const PhaseSpaceState& left, const PhaseSpaceState& right, double delta, int m,
                                       const PairMatrix& pl, const PairMatrix& pr, int samples, std::uint64_t seed,
                                       unsigned threads = 0) {
  if (samples < 1) throw std::invalid_argument("mc_average_fidelity: need at least one sample");
  const SwapMeasurement meas(left, right);
  SwapAverage out;
  out.p_success = meas.success_probability(delta);
  out.samples.resize(static_cast<std::size_t>(samples));
  parallel_for(out.samples.size(), threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const auto o = swap_once(meas, delta, rng);
    const auto fit = target_fidelity(*o.state, m, fold_swap(pl, pr, m, o.x0));
    out.samples[i] = {1, o.x0, o.p0, o.draws, fit.fidelity, fit.theta};
  });
  mean_and_sem(out);
  return out;
}

struct NestedSwap {
  PhaseSpaceState state;
  double fidelity = 0.0;
  PairMatrix target;
  std::vector<SwapSample> levels;
  std::vector<double> p_success;  // per level
};

inline constexpr int kMaxSwapLevels = 4;

// n swap levels starting from one segment. Both inputs of a level are copies
// of the same realization, so the target folds one matrix with itself.
inline NestedSwap nested_swap(const PhaseSpaceState& segment, int n, double delta, int m, Rng& rng,
                              const PairMatrix& start = psi_pair()) {
  if (n < 0 || n > kMaxSwapLevels) throw std::invalid_argument("nested_swap: levels must be in 0..4");
  NestedSwap out{segment, 0.0, start, {}, {}};
  if (n == 0) {
    out.fidelity = pair_fidelity(segment, m, start);
    return out;
  }
  for (int level = 1; level <= n; ++level) {
    const SwapMeasurement meas(out.state, out.state);
    out.p_success.push_back(meas.success_probability(delta));
    auto o = swap_once(meas, delta, rng);
    const auto fit = target_fidelity(*o.state, m, fold_swap(out.target, out.target, m, o.x0));
    out.levels.push_back({level, o.x0, o.p0, o.draws, fit.fidelity, fit.theta});
    out.state = std::move(*o.state);
    out.target = fit.target;
    out.fidelity = fit.fidelity;
  }
  return out;
}

// Mean final fidelity of `samples` independent nested runs.
inline SwapAverage mc_nested_fidelity(const PhaseSpaceState& segment, int n, double delta, int m, int samples,
                                      std::uint64_t seed, unsigned threads = 0) {
  if (samples < 1) throw std::invalid_argument("mc_nested_fidelity: need at least one sample");
  SwapAverage out;
  out.samples.resize(static_cast<std::size_t>(samples));
  std::vector<double> ps(out.samples.size(), 1.0);
  parallel_for(out.samples.size(), threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const auto r = nested_swap(segment, n, delta, m, rng);
    SwapSample s{n, 0.0, 0.0, 0, r.fidelity, 0.0};
    if (!r.levels.empty()) {
      const auto& last = r.levels.back();
      s = {n, last.x0, last.p0, last.draws, r.fidelity, last.theta};
    }
    out.samples[i] = s;
    for (double p : r.p_success) ps[i] *= p;
  });
  mean_and_sem(out);
  double pm = 0.0;
  for (double p : ps) pm += p;
  out.p_success = pm / static_cast<double>(ps.size());
  return out;
}

}  // namespace hqr
