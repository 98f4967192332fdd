// Local growth of approximate squeezed cat states.
//
// One step mixes two one-mode states on a balanced beam splitter, measures
// the position quadrature of the symmetric output and keeps the antisymmetric
// output when the outcome lies in [-delta, delta]. With the beam-splitter
// convention of phase_space_state.hpp the accepted state is
//
//   W(x, p) ~ \int_{-delta}^{delta} dy \int dq W_a((x+y)/sqrt2, (p+q)/sqrt2) W_b((y-x)/sqrt2, (q-p)/sqrt2),
//
// evaluated per axis through the mixing tensor
//
//   X[k][i][i'] = 2^{-(i+i')/2} sum_{a+i'-b=k} C(i,a) C(i',b) (-1)^{i'-b} I(i+i'-k, delta).

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hqr/errors.hpp"
#include "hqr/parallel.hpp"
#include "hqr/phase_space_state.hpp"
#include "hqr/precise.hpp"
#include "hqr/target_state.hpp"

namespace hqr {

struct GrowthSchedule {
  int m = 0;
  std::vector<double> deltas;
  std::vector<double> probs;
};

struct GrowthResult {
  PhaseSpaceState state;
  GrowthSchedule schedule;
  double fidelity = 0.0;  // against SqueezedSingleCat(m)
  double rate = 0.0;      // units of the input-state rate
};

namespace detail {

// Axis mixing tensor, layout [(k * (da + 1) + i) * (db + 1) + i'].
class MixTensor {
 public:
  MixTensor(int da, int db, double delta) : da_(da), db_(db), data_((da + db + 1) * (da + 1) * (db + 1), 0.0) {
    std::vector<double> moments(da + db + 1);
    for (int n = 0; n <= da + db; ++n) moments[n] = std::isinf(delta) ? full_moment(n) : interval_moment(n, delta);
    // Integer coefficients of x^k in (x + y)^i (y - x)^{i'} are summed exactly;
    // in floating point they cancel badly once i + i' approaches 64.
    for (int i = 0; i <= da; ++i)
      for (int ip = 0; ip <= db; ++ip) {
        const double scale = std::pow(2.0, -0.5 * (i + ip));
        for (int k = 0; k <= i + ip; ++k) {
          const double mom = moments[i + ip - k];
          if (mom == 0.0) continue;
          precise::Int c = 0;
          for (int a = std::max(0, k - ip); a <= std::min(i, k); ++a) {
            const int b = a + ip - k;
            const precise::Int term = precise::exact_binomial(i, a) * precise::exact_binomial(ip, b);
            c += ((ip - b) % 2 == 0) ? term : -term;
          }
          if (c != 0) at(k, i, ip) = scale * precise::to_double(c) * mom;
        }
      }
  }
  int da() const { return da_; }
  int db() const { return db_; }
  double& at(int k, int i, int ip) { return data_[(k * (da_ + 1) + i) * (db_ + 1) + ip]; }
  double at(int k, int i, int ip) const { return data_[(k * (da_ + 1) + i) * (db_ + 1) + ip]; }

 private:
  int da_, db_;
  std::vector<double> data_;
};

// S[i][i'][l] = sum_{j,j'} a[i][j] b[i'][j'] Xinf[l][j][j'], layout [(i * (db+1) + i') * (D+1) + l].
inline std::vector<double> momentum_contraction(const PhaseSpaceState& a, const PhaseSpaceState& b) {
  const int da = a.degree(0), db = b.degree(0), D = da + db;
  const MixTensor xi(da, db, kInf);
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  // U[i'][l][j] = sum_j' b[i'][j'] Xinf[l][j][j']
  std::vector<double> u(static_cast<std::size_t>((db + 1) * (D + 1) * (da + 1)), 0.0);
  for (int ip = 0; ip <= db; ++ip)
    for (int jp = 0; jp <= db; ++jp) {
      const double bv = cb[ip * (db + 1) + jp];
      if (bv == 0.0) continue;
      for (int l = 0; l <= D; ++l)
        for (int j = (l + jp) % 2; j <= da; j += 2) {
          const double x = xi.at(l, j, jp);
          if (x != 0.0) u[(ip * (D + 1) + l) * (da + 1) + j] += bv * x;
        }
    }
  std::vector<double> s(static_cast<std::size_t>((da + 1) * (db + 1) * (D + 1)), 0.0);
  for (int i = 0; i <= da; ++i)
    for (int j = 0; j <= da; ++j) {
      const double av = ca[i * (da + 1) + j];
      if (av == 0.0) continue;
      for (int ip = 0; ip <= db; ++ip)
        for (int l = 0; l <= D; ++l) {
          const double uv = u[(ip * (D + 1) + l) * (da + 1) + j];
          if (uv != 0.0) s[(i * (db + 1) + ip) * (D + 1) + l] += av * uv;
        }
    }
  return s;
}

inline PhaseSpaceState position_contraction(const std::vector<double>& s, const MixTensor& xd, double weight) {
  const int da = xd.da(), db = xd.db(), D = da + db;
  PhaseSpaceState out({D}, weight);
  auto c = out.coeffs();
  for (int k = 0; k <= D; ++k)
    for (int i = 0; i <= da; ++i)
      for (int ip = (k + i) % 2; ip <= db; ip += 2) {
        const double x = xd.at(k, i, ip);
        if (x == 0.0) continue;
        const double* row = &s[(i * (db + 1) + ip) * (D + 1)];
        double* dst = &c[k * (D + 1)];
        for (int l = 0; l <= D; ++l) dst[l] += x * row[l];
      }
  return out;
}

}  // namespace detail

// One growth step with possibly different inputs a (mode entering first) and b.
inline Conditioned grow_step(const PhaseSpaceState& a, const PhaseSpaceState& b, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("grow_step: acceptance half-width must be positive");
  if (a.modes() != 1 || b.modes() != 1) throw std::invalid_argument("grow_step: one-mode inputs required");
  const auto s = detail::momentum_contraction(a, b);
  const detail::MixTensor xd(a.degree(0), b.degree(0), delta);
  auto raw = detail::position_contraction(s, xd, a.weight() * b.weight());
  const double prob = total_integral(raw) / (total_integral(a) * total_integral(b));
  if (!(prob > 0.0)) return {0.0, raw};
  auto out = normalized(std::move(raw));
  out.set_weight(a.weight() * b.weight() * prob);
  detail::flush_small(out);
  return {prob, trimmed(out)};
}

inline Conditioned grow_step(const PhaseSpaceState& in, double delta) { return grow_step(in, in, delta); }

// (3/2)^{m-1} P_1 ... P_m
inline double growth_rate(const GrowthSchedule& s) {
  if (s.probs.empty()) throw std::invalid_argument("growth_rate: no success probabilities");
  double r = std::pow(1.5, static_cast<double>(s.probs.size()) - 1.0);
  for (double p : s.probs) r *= p;
  return r;
}

inline void validate_schedule(const GrowthSchedule& s) {
  if (s.m < 1 || static_cast<int>(s.deltas.size()) != s.m)
    throw std::invalid_argument("growth schedule: need m >= 1 and one half-width per level");
  for (std::size_t k = 0; k < s.deltas.size(); ++k) {
    if (!(s.deltas[k] > 0.0)) throw std::invalid_argument("growth schedule: half-widths must be positive");
    if (k > 0 && s.deltas[k] < s.deltas[k - 1])
      throw std::invalid_argument("growth schedule: half-widths must be nondecreasing");
  }
}

// Cached fidelity kernel against SqueezedSingleCat(m) at a given state degree.
inline const std::vector<double>& cat_fidelity_kernel(int m, int degree) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const std::vector<double>>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{m, degree}];
  if (!slot) {
    const auto cat = targets::squeezed_single_cat(m);
    const auto k = cross_kernel(cat, cat, degree);
    auto re = std::make_shared<std::vector<double>>(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) (*re)[i] = k[i].real();
    slot = std::move(re);
  }
  return *slot;
}

inline double cat_fidelity(const PhaseSpaceState& w, int m) {
  const auto& k = cat_fidelity_kernel(m, w.degree(0));
  double acc = 0.0;
  const auto c = w.coeffs();
  for (std::size_t f = 0; f < c.size(); ++f) acc += c[f] * k[f];
  return acc / total_integral(w);
}

inline GrowthResult grow_schedule(const PhaseSpaceState& input, GrowthSchedule schedule) {
  validate_schedule(schedule);
  schedule.probs.clear();
  PhaseSpaceState cur = input;
  for (double d : schedule.deltas) {
    auto step = grow_step(cur, d);
    if (!(step.probability > 0.0)) throw std::domain_error("grow_schedule: zero acceptance probability");
    schedule.probs.push_back(step.probability);
    cur = std::move(step.state);
  }
  GrowthResult r;
  r.fidelity = cat_fidelity(cur, schedule.m);
  r.rate = growth_rate(schedule);
  r.state = std::move(cur);
  r.schedule = std::move(schedule);
  return r;
}

// Growth chain in which one of the 2^m single-photon inputs is replaced by a
// two-photon state. Returns the defective output and the ratio
// prod_k P_defect,k / P_k of acceptance probabilities.
struct DefectGrowth {
  PhaseSpaceState state;
  double probability_ratio = 1.0;
};

inline DefectGrowth grow_with_defect(const GrowthSchedule& schedule) {
  validate_schedule(schedule);
  PhaseSpaceState normal = single_photon();
  PhaseSpaceState defect = fock(2);
  double ratio = 1.0;
  for (double d : schedule.deltas) {
    auto good = grow_step(normal, d);
    auto bad = grow_step(defect, normal, d);
    if (!(good.probability > 0.0) || !(bad.probability > 0.0))
      throw std::domain_error("grow_with_defect: zero acceptance probability");
    ratio *= bad.probability / good.probability;
    normal = std::move(good.state);
    defect = std::move(bad.state);
  }
  return {std::move(defect), ratio};
}

// ---------------------------------------------------------------------------
// Schedule optimization

struct SchedulePoint {
  std::vector<double> deltas;
  std::vector<double> probs;
  double fidelity = 0.0;
  double rate = 0.0;
};

struct GrowthGrid {
  double min_delta = 0.01;
  double max_delta = 2.0;
  int points = 25;           // geometric grid for the monotone schedule search
  int uniform_points = 200;  // finer grid for the single-delta comparison family
  unsigned threads = 0;

  std::vector<double> values(int n) const {
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k)
      v[k] = n == 1 ? min_delta : min_delta * std::pow(max_delta / min_delta, static_cast<double>(k) / (n - 1));
    return v;
  }
};

struct ParetoSet {
  int m = 0;
  std::vector<SchedulePoint> optimal;  // non-dominated, sorted by increasing rate
  std::vector<SchedulePoint> uniform;  // single-delta family, sorted by increasing rate
};

namespace detail {

// Evaluates P and F for every final half-width at once: with
// S = momentum_contraction(w, w) fixed, both are linear functionals of the
// position mixing tensor.
class LeafEvaluator {
 public:
  LeafEvaluator(const PhaseSpaceState& w, int m) : d_(w.degree(0)) {
    const int D = 2 * d_;
    const auto s = momentum_contraction(w, w);
    const auto& kern = cat_fidelity_kernel(m, D);
    vp_.assign(static_cast<std::size_t>((d_ + 1) * (d_ + 1)), 0.0);
    vf_.assign(static_cast<std::size_t>((D + 1) * (d_ + 1) * (d_ + 1)), 0.0);
    for (int i = 0; i <= d_; ++i)
      for (int ip = 0; ip <= d_; ++ip) {
        const double* row = &s[(i * (d_ + 1) + ip) * (D + 1)];
        double p = 0.0;
        for (int l = 0; l <= D; l += 2) p += row[l] * full_moment(l);
        vp_[i * (d_ + 1) + ip] = p;
        for (int k = 0; k <= D; ++k) {
          double f = 0.0;
          for (int l = 0; l <= D; ++l) f += kern[k * (D + 1) + l] * row[l];
          vf_[(k * (d_ + 1) + i) * (d_ + 1) + ip] = f;
        }
      }
  }

  // {probability, fidelity} for a normalized parent state.
  std::pair<double, double> operator()(const MixTensor& xd) const {
    const int D = 2 * d_;
    double p = 0.0, f = 0.0;
    for (int k = 0; k <= D; ++k) {
      const double ik = full_moment(k);
      for (int i = 0; i <= d_; ++i)
        for (int ip = (k + i) % 2; ip <= d_; ip += 2) {
          const double x = xd.at(k, i, ip);
          if (x == 0.0) continue;
          p += ik * x * vp_[i * (d_ + 1) + ip];
          f += x * vf_[(k * (d_ + 1) + i) * (d_ + 1) + ip];
        }
    }
    return {p, f / p};
  }

 private:
  int d_;
  std::vector<double> vp_, vf_;
};

// Keeps the points not dominated in (rate, fidelity); result sorted by rate.
inline std::vector<SchedulePoint> pareto_front(std::vector<SchedulePoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.rate != b.rate ? a.rate > b.rate : a.fidelity > b.fidelity;
  });
  std::vector<SchedulePoint> front;
  double best_f = -kInf;
  for (auto& p : pts)
    if (p.fidelity > best_f) {
      best_f = p.fidelity;
      front.push_back(std::move(p));
    }
  std::reverse(front.begin(), front.end());
  return front;
}

}  // namespace detail

// Fidelity and rate of every monotone schedule on the grid (prefix-shared
// depth-first search), reduced to the Pareto front, plus the uniform family.
inline ParetoSet optimize_schedule(int m, double fidelity_floor, const GrowthGrid& grid = {}) {
  if (m < 1 || m > 5) throw std::invalid_argument("optimize_schedule: m must be in 1..5");
  const auto vals = grid.values(grid.points);
  const int n = static_cast<int>(vals.size());

  // Mixing tensors per (input degree, grid index).
  std::vector<std::vector<std::unique_ptr<detail::MixTensor>>> mix(m);
  for (int lvl = 0; lvl < m; ++lvl) {
    const int d = 2 << lvl;  // input degree at this level
    mix[lvl].resize(n);
    parallel_for(n, grid.threads, [&](std::size_t k) {
      mix[lvl][k] = std::make_unique<detail::MixTensor>(d, d, vals[k]);
    });
  }
  (void)cat_fidelity_kernel(m, 2 << m);

  std::vector<std::vector<SchedulePoint>> per_root(n);
  auto leaf = [&](const PhaseSpaceState& w, int first, SchedulePoint prefix, std::vector<SchedulePoint>& out) {
    const detail::LeafEvaluator ev(with_degree(w, 0, 1 << m), m);
    for (int k = first; k < n; ++k) {
      auto [p, f] = ev(*mix[m - 1][k]);
      SchedulePoint pt = prefix;
      pt.deltas.push_back(vals[k]);
      pt.probs.push_back(p);
      pt.fidelity = f;
      pt.rate = std::pow(1.5, m - 1);
      for (double q : pt.probs) pt.rate *= q;
      out.push_back(std::move(pt));
    }
  };
  std::function<void(const PhaseSpaceState&, int, int, const SchedulePoint&, std::vector<SchedulePoint>&)> dfs =
      [&](const PhaseSpaceState& w, int lvl, int first, const SchedulePoint& prefix, std::vector<SchedulePoint>& out) {
        if (lvl == m - 1) {
          leaf(w, first, prefix, out);
          return;
        }
        const auto wd = with_degree(w, 0, 2 << lvl);
        const auto s = detail::momentum_contraction(wd, wd);
        for (int k = first; k < n; ++k) {
          auto raw = detail::position_contraction(s, *mix[lvl][k], 1.0);
          const double p = total_integral(raw);
          auto next = normalized(std::move(raw));
          detail::flush_small(next);
          SchedulePoint pre = prefix;
          pre.deltas.push_back(vals[k]);
          pre.probs.push_back(p);
          dfs(trimmed(next), lvl + 1, k, pre, out);
        }
      };

  if (m == 1) {
    leaf(single_photon(), 0, {}, per_root[0]);
  } else {
    parallel_for(n, grid.threads, [&](std::size_t k) {
      auto step = grow_step(single_photon(), vals[k]);
      SchedulePoint pre;
      pre.deltas.push_back(vals[k]);
      pre.probs.push_back(step.probability);
      dfs(step.state, 1, static_cast<int>(k), pre, per_root[k]);
    });
  }

  std::vector<SchedulePoint> all;
  for (auto& v : per_root) {
    auto f = detail::pareto_front(std::move(v));
    all.insert(all.end(), std::make_move_iterator(f.begin()), std::make_move_iterator(f.end()));
  }

  ParetoSet set;
  set.m = m;
  set.optimal = detail::pareto_front(std::move(all));

  const auto uvals = grid.values(grid.uniform_points);
  set.uniform.resize(uvals.size());
  parallel_for(uvals.size(), grid.threads, [&](std::size_t k) {
    GrowthSchedule s{m, std::vector<double>(m, uvals[k]), {}};
    auto r = grow_schedule(single_photon(), s);
    set.uniform[k] = {r.schedule.deltas, r.schedule.probs, r.fidelity, r.rate};
  });
  std::sort(set.uniform.begin(), set.uniform.end(), [](const auto& a, const auto& b) { return a.rate < b.rate; });

  bool feasible = false;
  for (const auto& p : set.optimal) feasible = feasible || p.fidelity >= fidelity_floor;
  if (!feasible)
    throw InfeasibleError("optimize_schedule: no schedule on the grid reaches fidelity " +
                          format_number(fidelity_floor) + " for m = " + std::to_string(m));
  return set;
}

// Largest rate with fidelity >= target along a curve sorted by rate, with
// log-rate interpolation between the bracketing points.
inline std::optional<double> rate_at_fidelity(const std::vector<SchedulePoint>& curve, double target) {
  std::optional<double> best;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const auto& a = curve[k];
    if (a.fidelity >= target) best = std::max(best.value_or(0.0), a.rate);
    if (k + 1 < curve.size()) {
      const auto& b = curve[k + 1];
      if ((a.fidelity - target) * (b.fidelity - target) < 0.0) {
        const double t = (a.fidelity - target) / (a.fidelity - b.fidelity);
        const double r = std::exp(std::log(a.rate) + t * (std::log(b.rate) - std::log(a.rate)));
        best = std::max(best.value_or(0.0), r);
      }
    }
  }
  return best;
}

namespace detail {

// Scale s such that the schedule s * shape reaches `target` fidelity;
// fidelity falls as every half-width grows.
inline std::optional<SchedulePoint> scale_to_fidelity(int m, const std::vector<double>& shape, double target) {
  auto eval = [&](double s) {
    GrowthSchedule g{m, shape, {}};
    for (auto& d : g.deltas) d *= s;
    auto r = grow_schedule(single_photon(), g);
    return SchedulePoint{r.schedule.deltas, r.schedule.probs, r.fidelity, r.rate};
  };
  double lo = 1e-3 / shape.front(), hi = lo;
  auto plo = eval(lo);
  if (plo.fidelity < target) return std::nullopt;
  SchedulePoint phi = plo;
  while (phi.fidelity >= target) {
    lo = hi;
    plo = phi;
    hi *= 2.0;
    if (hi * shape.back() > 50.0) return plo;
    phi = eval(hi);
  }
  for (int it = 0; it < 40 && hi / lo > 1.0 + 1e-7; ++it) {
    const double mid = std::sqrt(lo * hi);
    auto pm = eval(mid);
    if (pm.fidelity >= target) {
      lo = mid;
      plo = pm;
    } else {
      hi = mid;
    }
  }
  return plo;
}

}  // namespace detail

// Continuous refinement of the best grid schedule at fixed fidelity: search
// over schedule shapes (log half-width offsets, kept monotone), each rescaled
// onto the fidelity level set.
inline SchedulePoint refine_schedule(int m, double target, const std::vector<double>& start, int rounds = 6) {
  std::vector<double> shape = start;
  for (auto& d : shape) d /= start.front();
  auto best = detail::scale_to_fidelity(m, shape, target);
  if (!best) throw InfeasibleError("refine_schedule: fidelity target unreachable");
  double step = 0.25;
  for (int round = 0; round < rounds; ++round) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int k = 1; k < m; ++k)
        for (double dir : {1.0, -1.0}) {
          auto trial = shape;
          const double f = std::exp(dir * step);
          for (int j = k; j < m; ++j) trial[j] *= f;  // moves the tail, preserving monotonicity
          if (trial[k] < trial[k - 1]) continue;
          auto pt = detail::scale_to_fidelity(m, trial, target);
          if (pt && pt->rate > best->rate * (1.0 + 1e-9)) {
            best = pt;
            shape = trial;
            improved = true;
          }
        }
    }
    step *= 0.5;
  }
  return *best;
}

// Rate of the single-delta family at fixed fidelity, by bisection in delta.
inline SchedulePoint uniform_at_fidelity(int m, double target) {
  auto pt = detail::scale_to_fidelity(m, std::vector<double>(m, 1.0), target);
  if (!pt) throw InfeasibleError("uniform_at_fidelity: fidelity target unreachable");
  return *pt;
}

}  // namespace hqr
