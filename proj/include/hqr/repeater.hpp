// End-to-end repeater model: growth at every site, connection of neighbouring
// sites over L0 = L / 2^n of fiber, n nested swap levels, and the rate and
// fidelity of the distributed pair.
//
// Rate bookkeeping (isolated in total_time):
//
//   T_growth  = 1 / (r_rep p_pair eta_spd R_growth)     one grown state per site
//   T_attempt = T_growth + L0 / c                        sequential, no pipelining
//   T_total   = (3/2)^n T_attempt / (P_connect P_swap,1 ... P_swap,n)
//
// P_connect counts both detector branches; the (3/2)^n factor is the
// multiplexed-memory waiting time for n levels of pair doubling.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hqr/connect.hpp"
#include "hqr/errors.hpp"
#include "hqr/fit_tables.hpp"
#include "hqr/growth.hpp"
#include "hqr/parallel.hpp"
#include "hqr/sampling.hpp"
#include "hqr/swap.hpp"

namespace hqr {

struct RepeaterConstants {
  double eta_spd = 0.5;  // detector efficiency
  double l_att = 20.0;   // km
  double c = 2e5;        // km/s
};

inline constexpr int kMaxRepeaterM = 3;
inline constexpr int kMaxRepeaterN = 4;
// Previous protocol at L = 1000 km, r_rep = 1 MHz, F >= 0.8 (literature value).
inline constexpr double kPreviousProtocolRate1000km = 0.004;  // pairs/min

struct RepeaterConfig {
  double L = 1000.0;  // km
  int n = 0;
  int m = 1;
  std::vector<double> deltas;  // growth half-widths, one per iteration
  double r = 0.01;             // tap reflectivity
  double delta = 0.1;          // swap half-width
  double p_pair = 1e-3;
  double r_rep = 1e6;  // Hz
  RepeaterConstants k;

  double L0() const { return L / std::ldexp(1.0, n); }

  void validate() const {
    if (!(L >= 0.0) || !std::isfinite(L)) throw std::invalid_argument("repeater: L must be a finite length >= 0 km");
    if (n < 0 || n > kMaxRepeaterN) throw std::invalid_argument("repeater: swap levels n must be in 0..4");
    if (m < 1 || m > kMaxRepeaterM) throw std::invalid_argument("repeater: growth iterations m must be in 1..3");
    validate_schedule({m, deltas, {}});
    validate_connect(r, 1.0);
    if (!(delta > 0.0)) throw std::invalid_argument("repeater: swap half-width delta must be positive");
    if (!(p_pair > 0.0 && p_pair < 1.0)) throw std::invalid_argument("repeater: p_pair must lie in (0, 1)");
    if (!(r_rep > 0.0)) throw std::invalid_argument("repeater: r_rep must be positive (Hz)");
  }
};

inline double channel_efficiency(const RepeaterConfig& cfg) {
  return cfg.k.eta_spd * std::exp(-cfg.L0() / (2.0 * cfg.k.l_att));
}

// ---------------------------------------------------------------------------
// Rate

struct StageProbabilities {
  double growth_rate = 0.0;    // R_growth, per heralded input photon
  double p_connect = 0.0;      // both branches
  std::vector<double> p_swap;  // one per level
};

// Seconds per distributed pair.
inline double total_time(const RepeaterConfig& cfg, const StageProbabilities& p) {
  if (static_cast<int>(p.p_swap.size()) != cfg.n) throw std::invalid_argument("total_rate: one P_swap per level");
  if (!(p.growth_rate > 0.0) || !(p.p_connect > 0.0)) throw std::domain_error("total_rate: zero success probability");
  double denom = p.p_connect;
  for (double q : p.p_swap) {
    if (!(q > 0.0)) throw std::domain_error("total_rate: zero success probability");
    denom *= q;
  }
  const double t_growth = 1.0 / (cfg.r_rep * cfg.p_pair * cfg.k.eta_spd * p.growth_rate);
  const double t_attempt = t_growth + cfg.L0() / cfg.k.c;
  return std::pow(1.5, cfg.n) * t_attempt / denom;
}

inline double total_rate(const RepeaterConfig& cfg, const StageProbabilities& p) {
  return 60.0 / total_time(cfg, p);
}

// ---------------------------------------------------------------------------
// Fitted fidelity model

struct AnalyticPoint {
  int n = 0;
  int m = 1;
  double r_growth = 0.0;   // R_growth
  double p_rescaled = 0.0;  // P_connect / eta, one branch
  double delta = 0.0;
  double p_pair = 0.0;
  double f2 = 1.0;
  double fidelity_two_photon = 0.5;  // F_2, not covered by the fits
};

namespace detail {

inline double swap_delta_form(const FitTables& t, int n, int m, double delta) {
  if (m == 3) return t.at("e", n, 3) + t.at("f", n, 3) * delta;
  return t.at("e", n, m) * std::exp(t.at("f", n, m) * delta) + t.at("g", n, m) * std::exp(t.at("h", n, m) * delta);
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace detail

inline double two_photon_tau(int n, int m, double f2) { return f2 / 4.0 * std::ldexp(1.0, m + n + 1); }

// Each fit form enters relative to its value at the ideal parameter; the
// ideal (n, m) level is the mean of the m-quadratic and n-quadratic forms.
inline double analytic_fidelity(const AnalyticPoint& a, const FitTables& t) {
  if (a.n < 0 || a.n > kMaxRepeaterN || a.m < 1 || a.m > kMaxRepeaterM)
    throw std::out_of_range("analytic_fidelity: (n, m) outside the fit tables");
  const double quad = t.vec("i", a.n) + t.vec("j", a.n) * a.m * a.m + t.vec("k", a.n) * a.m;
  const double nq = 1.0 - t.vec("l", a.m) * a.n * a.n;
  double f = 0.5 * (detail::clamp01(quad) + detail::clamp01(nq));

  const double c = t.at("c", a.n, a.m), d = t.at("d", a.n, a.m);
  f *= detail::clamp01((1.0 - c * std::exp(d * a.r_growth)) / (1.0 - c));

  const double x = a.p_rescaled;
  f *= detail::clamp01(1.0 - t.at("a", a.n, a.m) * x * x - t.at("b", a.n, a.m) * x);

  if (a.n > 0) {
    const double s0 = detail::swap_delta_form(t, a.n, a.m, 0.0);
    if (s0 > 0.0) f *= detail::clamp01(detail::swap_delta_form(t, a.n, a.m, a.delta) / s0);
  }
  const double w = std::min(1.0, two_photon_tau(a.n, a.m, a.f2) * a.p_pair);
  return (1.0 - w) * f + w * a.fidelity_two_photon;
}

// ---------------------------------------------------------------------------
// Simulation

struct SimulationSettings {
  int samples = 100;
  bool two_photon = true;
  unsigned threads = 0;
};

struct RepeaterSimulation {
  double fidelity = 0.0;  // mixed over the two-photon perturbation
  double sem = 0.0;
  double f1 = 0.0;  // one-photon inputs only
  double f2 = 0.0;  // one two-photon input
  double tau = 0.0;
  double two_photon_factor = 1.0;  // f_2
  double growth_fidelity = 0.0;
  double eta = 0.0;
  double connect_fidelity = 0.0;
  StageProbabilities probs;
  double rate = 0.0;  // pairs/min
};

namespace detail {

// Two chains advanced together: the good chain swaps with itself, the
// defective chain swaps with the good one at the same level.
struct ChainSample {
  double f1 = 0.0, f2 = 0.0;
  std::vector<double> p_swap;
};

inline ChainSample run_chains(const PhaseSpaceState& good, const PhaseSpaceState* bad, int n, double delta, int m,
                              std::uint64_t seed) {
  Rng rng_g(derive_seed(seed, 0)), rng_b(derive_seed(seed, 1));
  PhaseSpaceState g = good;
  std::optional<PhaseSpaceState> b;
  if (bad) b = *bad;
  PairMatrix tg = psi_pair(), tb = psi_pair();
  ChainSample out;
  for (int level = 1; level <= n; ++level) {
    std::optional<PhaseSpaceState> next_b;
    if (b) {
      const SwapMeasurement mb(*b, g);
      auto ob = swap_once(mb, delta, rng_b);
      const auto fit = target_fidelity(*ob.state, m, fold_swap(tb, tg, m, ob.x0));
      tb = fit.target;
      out.f2 = fit.fidelity;
      next_b = std::move(*ob.state);
    }
    const SwapMeasurement mg(g, g);
    out.p_swap.push_back(mg.success_probability(delta));
    auto og = swap_once(mg, delta, rng_g);
    const auto fit = target_fidelity(*og.state, m, fold_swap(tg, tg, m, og.x0));
    tg = fit.target;
    out.f1 = fit.fidelity;
    g = std::move(*og.state);
    b = std::move(next_b);
  }
  return out;
}

}  // namespace detail

inline RepeaterSimulation simulate_fidelity(const RepeaterConfig& cfg, std::uint64_t seed,
                                            const SimulationSettings& s = {}) {
  cfg.validate();
  if (s.samples < 1) throw std::invalid_argument("simulate_fidelity: need at least one sample");
  RepeaterSimulation out;
  const GrowthSchedule sched{cfg.m, cfg.deltas, {}};
  const auto grown = grow_schedule(single_photon(), sched);
  out.growth_fidelity = grown.fidelity;
  out.probs.growth_rate = grown.rate;
  out.eta = channel_efficiency(cfg);
  const auto conn = connect(grown.state, grown.state, cfg.r, out.eta, cfg.m);
  out.connect_fidelity = conn.fidelity;
  out.probs.p_connect = conn.p_connect_both;

  std::optional<PhaseSpaceState> bad_pair;
  if (s.two_photon) {
    const auto defect = grow_with_defect(sched);
    out.two_photon_factor = defect.probability_ratio;
    bad_pair = connect(normalized(defect.state), grown.state, cfg.r, out.eta, cfg.m).state;
  }
  out.tau = s.two_photon ? two_photon_tau(cfg.n, cfg.m, out.two_photon_factor) : 0.0;
  const double w = std::min(1.0, out.tau * cfg.p_pair);

  std::vector<double> mixed;
  if (cfg.n == 0) {
    out.f1 = pair_fidelity(conn.state, cfg.m, psi_pair());
    out.f2 = bad_pair ? pair_fidelity(*bad_pair, cfg.m, psi_pair()) : 0.0;
    out.fidelity = (1.0 - w) * out.f1 + w * out.f2;
  } else {
    std::vector<detail::ChainSample> runs(static_cast<std::size_t>(s.samples));
    parallel_for(runs.size(), s.threads, [&](std::size_t i) {
      runs[i] = detail::run_chains(conn.state, bad_pair ? &*bad_pair : nullptr, cfg.n, cfg.delta, cfg.m,
                                   derive_seed(seed, i));
    });
    out.probs.p_swap.assign(static_cast<std::size_t>(cfg.n), 0.0);
    double s1 = 0.0, s2 = 0.0;
    for (const auto& r : runs) {
      s1 += r.f1;
      s2 += r.f2;
      mixed.push_back((1.0 - w) * r.f1 + w * r.f2);
      for (int k = 0; k < cfg.n; ++k) out.probs.p_swap[k] += r.p_swap[k];
    }
    const auto ns = static_cast<double>(runs.size());
    for (auto& p : out.probs.p_swap) p /= ns;
    out.f1 = s1 / ns;
    out.f2 = s2 / ns;
    double mean = 0.0;
    for (double v : mixed) mean += v;
    mean /= ns;
    double var = 0.0;
    for (double v : mixed) var += (v - mean) * (v - mean);
    out.fidelity = mean;
    out.sem = ns > 1 ? std::sqrt(var / (ns - 1.0) / ns) : 0.0;
  }
  out.rate = total_rate(cfg, out.probs);
  return out;
}

// ---------------------------------------------------------------------------
// Optimization

// Search coordinates, all positive and stepped on a log2 scale.
struct Knobs {
  double growth_deficit = 0.02;  // accepted drop below the best growth fidelity
  double p_rescaled = 0.02;      // P_connect / eta, one branch
  double delta = 0.3;
  double p_pair = 1e-3;

  static constexpr int kCount = 4;
  double& operator[](int i) { return i == 0 ? growth_deficit : i == 1 ? p_rescaled : i == 2 ? delta : p_pair; }
  double operator[](int i) const { return const_cast<Knobs&>(*this)[i]; }
  static double lo(int i) { return std::array<double, 4>{1e-4, 1e-4, 0.02, 1e-7}[i]; }
  static double hi(int i) { return std::array<double, 4>{0.3, 0.1, 2.0, 0.2}[i]; }
};

struct OptimizeSettings {
  double floor = 0.8;
  int samples = 100;
  int rounds = 2;
  int points = 5;
  int pairs = 0;  // (m, n) combinations refined, best analytic first; 0 = all
  int final_samples = 1000;  // re-evaluation of the winner; 0 skips it
  bool analytic_seed = true;
  unsigned threads = 0;
};

struct GridTraceEntry {
  int round = 0;
  int m = 0, n = 0;
  Knobs knobs;
  double fidelity = 0.0;
  double sem = 0.0;
  double rate = 0.0;
  bool feasible = false;
};

struct AnalyticSeed {
  int m = 0, n = 0;
  Knobs knobs;
  double fidelity = 0.0;
  double rate = 0.0;
  bool feasible = false;
};

struct OptimizeResult {
  bool feasible = false;
  RepeaterConfig config;
  Knobs knobs;
  double rate = 0.0;
  double fidelity = 0.0;
  double sem = 0.0;
  // Winner re-simulated with final_samples on an independent stream.
  double final_fidelity = 0.0;
  double final_sem = 0.0;
  double final_rate = 0.0;
  std::vector<AnalyticSeed> seeds;
  std::vector<GridTraceEntry> trace;
};

namespace detail {

inline const std::vector<SchedulePoint>& repeater_front(int m) {
  static std::mutex mu;
  static std::map<int, std::vector<SchedulePoint>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, optimize_schedule(m, 0.0).optimal).first;
  return it->second;
}

// Fastest schedule on the growth front within `deficit` of its best fidelity.
inline const SchedulePoint& schedule_for(int m, double deficit) {
  const auto& front = repeater_front(m);
  double best = 0.0;
  for (const auto& p : front) best = std::max(best, p.fidelity);
  const SchedulePoint* pick = nullptr;
  for (const auto& p : front)
    if (p.fidelity >= best - deficit && (!pick || p.rate > pick->rate)) pick = &p;
  return *pick;
}

inline double two_photon_factor(int m, const std::vector<double>& deltas) {
  static std::mutex mu;
  static std::map<std::vector<double>, double> cache;
  {
    std::lock_guard lock(mu);
    const auto it = cache.find(deltas);
    if (it != cache.end()) return it->second;
  }
  const double f = grow_with_defect({m, deltas, {}}).probability_ratio;
  std::lock_guard lock(mu);
  return cache[deltas] = f;
}

// Swap acceptance of two ideal pairs, the analytic stand-in for P_swap.
inline double ideal_swap_probability(int m, double delta) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const SwapMeasurement>> cache;
  std::shared_ptr<const SwapMeasurement> meas;
  {
    std::lock_guard lock(mu);
    auto& slot = cache[m];
    if (!slot) {
      const auto psi = wigner(targets::psi_m(m));
      slot = std::make_shared<const SwapMeasurement>(psi, psi);
    }
    meas = slot;
  }
  return meas->success_probability(delta);
}

// r putting P_connect / eta at the requested value, from the small-r slope.
inline double r_for_rescaled(const PhaseSpaceState& grown, double p_rescaled) {
  const double slope = connect_raw(grown, grown, kSmallR, 1.0).probability / kSmallR;
  return std::min(0.5, p_rescaled / slope);
}

inline RepeaterConfig config_from(double L, double r_rep, int m, int n, const Knobs& k, const PhaseSpaceState& grown,
                                  const std::vector<double>& deltas) {
  RepeaterConfig c;
  c.L = L;
  c.r_rep = r_rep;
  c.m = m;
  c.n = n;
  c.deltas = deltas;
  c.r = r_for_rescaled(grown, k.p_rescaled);
  c.delta = k.delta;
  c.p_pair = k.p_pair;
  return c;
}

inline AnalyticSeed analytic_seed(double L, double r_rep, int m, int n, double floor, const FitTables& fits) {
  AnalyticSeed best{m, n, Knobs{}, 0.0, 0.0, false};
  constexpr int kSteps = 10;
  auto axis = [](int i, int s) {
    return Knobs::lo(i) * std::pow(Knobs::hi(i) / Knobs::lo(i), static_cast<double>(s) / (kSteps - 1));
  };
  RepeaterConfig cfg;
  cfg.L = L;
  cfg.n = n;
  cfg.m = m;
  cfg.r_rep = r_rep;
  const double eta = channel_efficiency(cfg);
  for (int a = 0; a < kSteps; ++a) {
    const auto& sp = schedule_for(m, axis(0, a));
    const double f2 = two_photon_factor(m, sp.deltas);
    for (int b = 0; b < kSteps; ++b)
      for (int c = 0; c < (n > 0 ? kSteps : 1); ++c)
        for (int d = 0; d < kSteps; ++d) {
          Knobs k{axis(0, a), axis(1, b), axis(2, c), axis(3, d)};
          AnalyticPoint ap{n, m, sp.rate, k.p_rescaled, k.delta, k.p_pair, f2};
          const double f = analytic_fidelity(ap, fits);
          StageProbabilities pr{sp.rate, 2.0 * k.p_rescaled * eta, std::vector<double>(n, 0.0)};
          for (auto& q : pr.p_swap) q = ideal_swap_probability(m, k.delta);
          cfg.p_pair = k.p_pair;
          const double rate = total_rate(cfg, pr);
          const bool ok = f >= floor;
          if ((ok && (!best.feasible || rate > best.rate)) || (!ok && !best.feasible && f > best.fidelity))
            best = {m, n, k, f, rate, ok};
        }
  }
  return best;
}

}  // namespace detail

// Coordinate-wise grid refinement around a seed: each round sweeps every knob
// over `points` log2-spaced values (step halving per round) with the others
// held at the incumbent, keeping the fastest configuration meeting the floor.
inline OptimizeResult optimize(double L, double r_rep, const OptimizeSettings& s, std::uint64_t seed,
                               const FitTables& fits) {
  if (!(L > 0.0)) throw std::invalid_argument("optimize: L must be positive (km)");
  if (!(r_rep > 0.0)) throw std::invalid_argument("optimize: r_rep must be positive (Hz)");
  OptimizeResult out;
  for (int m = 1; m <= kMaxRepeaterM; ++m)
    for (int n = 0; n <= kMaxRepeaterN; ++n) {
      if (s.analytic_seed)
        out.seeds.push_back(detail::analytic_seed(L, r_rep, m, n, s.floor, fits));
      else
        out.seeds.push_back({m, n, Knobs{}, 0.0, 0.0, false});
    }
  auto order = out.seeds;
  std::stable_sort(order.begin(), order.end(), [](const AnalyticSeed& a, const AnalyticSeed& b) {
    if (a.feasible != b.feasible) return a.feasible;
    return a.feasible ? a.rate > b.rate : a.fidelity > b.fidelity;
  });
  if (s.pairs > 0 && static_cast<std::size_t>(s.pairs) < order.size()) order.resize(static_cast<std::size_t>(s.pairs));

  const SimulationSettings sim{s.samples, true, s.threads};
  std::uint64_t evals = 0;
  for (const auto& start : order) {
    const int m = start.m, n = start.n;
    Knobs inc = start.knobs;
    GridTraceEntry best{0, m, n, inc, 0.0, 0.0, 0.0, false};
    auto evaluate = [&](int round, const Knobs& k) {
      const auto& sp = detail::schedule_for(m, k.growth_deficit);
      const auto grown = grow_schedule(single_photon(), {m, sp.deltas, {}});
      const auto cfg = detail::config_from(L, r_rep, m, n, k, grown.state, sp.deltas);
      RepeaterSimulation r;
      try {
        r = simulate_fidelity(cfg, derive_seed(seed, evals++), sim);
      } catch (const std::domain_error&) {
        out.trace.push_back({round, m, n, k, 0.0, 0.0, 0.0, false});
        return;
      }
      GridTraceEntry e{round, m, n, k, r.fidelity, r.sem, r.rate, r.fidelity >= s.floor};
      out.trace.push_back(e);
      const bool better = e.feasible ? (!best.feasible || e.rate > best.rate)
                                     : (!best.feasible && e.fidelity > best.fidelity);
      if (better) {
        best = e;
        if (e.feasible && (!out.feasible || e.rate > out.rate)) {
          out.feasible = true;
          out.config = cfg;
          out.knobs = k;
          out.rate = e.rate;
          out.fidelity = e.fidelity;
          out.sem = e.sem;
        }
      }
    };
    evaluate(0, inc);
    for (int round = 1; round <= s.rounds; ++round) {
      const double step = std::ldexp(1.0, 1 - round);  // log2 units
      for (int knob = 0; knob < Knobs::kCount; ++knob) {
        if (knob == 2 && n == 0) continue;
        const Knobs centre = best.knobs;
        for (int j = 0; j < s.points; ++j) {
          const double off = (j - (s.points - 1) / 2.0) * step;
          if (off == 0.0) continue;
          Knobs k = centre;
          k[knob] = std::clamp(centre[knob] * std::exp2(off), Knobs::lo(knob), Knobs::hi(knob));
          if (k[knob] == centre[knob]) continue;
          evaluate(round, k);
        }
      }
    }
  }
  if (!out.feasible)
    throw InfeasibleError("optimize: no configuration reached F >= " + std::to_string(s.floor) +
                          " within m <= 3, n <= 4");
  if (s.final_samples > 0) {
    const auto r = simulate_fidelity(out.config, derive_seed(seed, ~std::uint64_t{0}),
                                     SimulationSettings{s.final_samples, true, s.threads});
    out.final_fidelity = r.fidelity;
    out.final_sem = r.sem;
    out.final_rate = r.rate;
  } else {
    out.final_fidelity = out.fidelity;
    out.final_sem = out.sem;
    out.final_rate = out.rate;
  }
  return out;
}

inline OptimizeResult optimize(double L, double r_rep, const OptimizeSettings& s, std::uint64_t seed) {
  return optimize(L, r_rep, s, seed, default_fit_tables());
}

}  // namespace hqr
