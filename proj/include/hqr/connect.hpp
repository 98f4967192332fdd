// Entanglement generation between two sites: each site taps its grown state
// on a weak beam splitter, the tapped light crosses a lossy fiber, the two
// fibers meet on a balanced beam splitter, and a single (non-resolving)
// detector click heralds the two-mode state left in the memories.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hqr/bridge.hpp"
#include "hqr/fit.hpp"
#include "hqr/growth.hpp"
#include "hqr/parallel.hpp"
#include "hqr/target_state.hpp"

namespace hqr {

struct ConnectionResult {
  PhaseSpaceState state;          // modes: memory a, memory b
  double p_connect = 0.0;         // single click branch
  double p_connect_both = 0.0;    // both click branches, 2 * p_connect
  double p_c_noloss = 0.0;        // same r, lossless fibers
  double fidelity = 0.0;          // against psi_m(m); NaN when m < 1
};

namespace detail {

// State of one site after the tap and the fiber: mode 0 memory, mode 1 light.
inline PhaseSpaceState tap_and_transmit(const PhaseSpaceState& in, double r, double eta) {
  auto w = beam_splitter(tensor(in, vacuum()), 0, 1, std::asin(std::sqrt(r)));
  if (eta < 1.0) w = loss_channel(w, 1, eta);
  return w;
}

// Vacuum in the left central output and a click in the right one, written in
// the pre-beam-splitter coordinates of the two fibers:
//   (2 pi)^2 W_vac(u) (1/(2 pi) - W_vac(v)) = 2 e^{-u^2..} - 4 e^{-u^2 - v^2..}.
// This branch heralds the symmetric combination |0_m 1_m> + |1_m 0_m>.
inline std::vector<PairKernel> click_kernels(int da, int db) {
  return {
      {2.0, integrated_axis_kernel(da, db, 2.0, 1.0), integrated_axis_kernel(da, db, 2.0, 1.0)},
      {-4.0, integrated_axis_kernel(da, db, 2.0, 2.0), integrated_axis_kernel(da, db, 2.0, 2.0)},
  };
}

struct RawConnection {
  PhaseSpaceState state;
  double probability;
};

inline RawConnection connect_raw(const PhaseSpaceState& a_in, const PhaseSpaceState& b_in, double r, double eta) {
  const auto a = tap_and_transmit(a_in, r, eta);
  const auto b = tap_and_transmit(b_in, r, eta);
  auto raw = contract_pair(a, 1, b, 1, click_kernels(a.degree(1), b.degree(1)));
  const double prob = total_integral(raw) / (total_integral(a_in) * total_integral(b_in));
  if (!(prob > 0.0)) throw std::domain_error("connect: click probability vanished");
  auto out = normalized(std::move(raw));
  out.set_weight(a_in.weight() * b_in.weight() * prob);
  return {std::move(out), prob};
}

}  // namespace detail

// Below this r * eta the click branch is a difference of O(1) terms smaller
// than double resolution allows.
inline constexpr double kMinTapTransmission = 1e-9;

inline void validate_connect(double r, double eta) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("connect: reflectivity r must lie in (0, 1)");
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("connect: transmission eta must lie in (0, 1]");
  if (r * eta < kMinTapTransmission)
    throw std::domain_error("connect: r * eta below 1e-9 is beyond double-precision resolution");
}

// m selects the reference psi_m(m); pass 0 to skip the fidelity.
inline ConnectionResult connect(const PhaseSpaceState& a_in, const PhaseSpaceState& b_in, double r, double eta,
                                int m) {
  validate_connect(r, eta);
  if (a_in.modes() != 1 || b_in.modes() != 1) throw std::invalid_argument("connect: one-mode inputs required");
  auto main = detail::connect_raw(a_in, b_in, r, eta);
  ConnectionResult res;
  res.p_connect = main.probability;
  res.p_connect_both = 2.0 * main.probability;
  res.p_c_noloss = eta == 1.0 ? main.probability : detail::connect_raw(a_in, b_in, r, 1.0).probability;
  res.fidelity = m >= 1 ? fidelity(main.state, targets::psi_m(m)) : std::nan("");
  res.state = std::move(main.state);
  return res;
}

struct ConnectPoint {
  double r = 0.0;
  double eta = 1.0;
  double p_connect = 0.0;
  double p_c_noloss = 0.0;
  double fidelity = 0.0;

  double rescaled() const { return p_connect / eta; }
};

inline std::vector<ConnectPoint> scan_r(const PhaseSpaceState& a_in, const PhaseSpaceState& b_in,
                                        const std::vector<double>& rs, double eta, int m, unsigned threads = 0) {
  std::vector<ConnectPoint> out(rs.size());
  parallel_for(rs.size(), threads, [&](std::size_t i) {
    const auto c = connect(a_in, b_in, rs[i], eta, m);
    out[i] = {rs[i], eta, c.p_connect, c.p_c_noloss, c.fidelity};
  });
  return out;
}

// Linear fit of fidelity against p_connect / eta; the reported b is minus the slope.
struct ConnectFit {
  double a = 0.0;  // quadratic coefficient, zero for the linear model
  double b = 0.0;
  double intercept = 1.0;
  double r2 = 0.0;
};

inline constexpr double kSmallR = 1e-4;

// r values putting p_connect / eta on an even grid up to max_rescaled, using the
// initial slope of p_connect in r.
inline std::vector<double> small_r_grid(const PhaseSpaceState& a_in, const PhaseSpaceState& b_in, int points = 10,
                                        double max_rescaled = 0.1) {
  const double slope = detail::connect_raw(a_in, b_in, kSmallR, 1.0).probability / kSmallR;
  std::vector<double> rs;
  for (int i = 1; i <= points; ++i) rs.push_back(max_rescaled * i / points / slope);
  return rs;
}

inline ConnectFit fit_connect_curve(const std::vector<ConnectPoint>& pts) {
  std::vector<double> x, y;
  for (const auto& p : pts) {
    x.push_back(p.rescaled());
    y.push_back(p.fidelity);
  }
  const auto f = linear_fit(x, y);
  return {0.0, -f.slope, f.intercept, f.r2};
}

struct GrowthConnectPoint {
  double rate = 0.0;
  double fidelity = 0.0;
};

// Connection of two equally grown states at the small-r proxy and eta = 1.
inline std::vector<GrowthConnectPoint> scan_growth_imperfection(const std::vector<GrowthSchedule>& schedules,
                                                                unsigned threads = 0) {
  std::vector<GrowthConnectPoint> out(schedules.size());
  parallel_for(schedules.size(), threads, [&](std::size_t i) {
    const auto g = grow_schedule(single_photon(), schedules[i]);
    const auto c = connect(g.state, g.state, kSmallR, 1.0, schedules[i].m);
    out[i] = {g.rate, c.fidelity};
  });
  return out;
}

// Pareto-optimal schedules of the growth search, lowest rate first.
inline std::vector<GrowthSchedule> pareto_schedules(int m, const GrowthGrid& grid = {}) {
  std::vector<GrowthSchedule> out;
  for (const auto& p : optimize_schedule(m, 0.0, grid).optimal) out.push_back({m, p.deltas, p.probs});
  return out;
}

// Exponential fit over the points at or above the fidelity floor.
inline ExpFit fit_growth_curve(const std::vector<GrowthConnectPoint>& pts, double floor = 0.8) {
  std::vector<double> r, f;
  for (const auto& p : pts) {
    if (p.fidelity < floor) continue;
    r.push_back(p.rate);
    f.push_back(p.fidelity);
  }
  return exp_deficit_fit(r, f);
}

}  // namespace hqr
