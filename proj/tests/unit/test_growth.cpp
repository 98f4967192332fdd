#include <gtest/gtest.h>

#include <cmath>

#include "hqr/growth.hpp"
#include "oracle.hpp"

using namespace hqr;

namespace {

// |<x|1>|^2
double fock1_density(double x) { return 2.0 * x * x * std::exp(-x * x) / std::sqrt(kPi); }

// Acceptance probability of two single photons: both x outcomes interfere and
// |(xa - xb) / sqrt2| <= delta. Brute force in the rotated frame.
double fock1_acceptance(double delta) {
  return oracle::integrate(
      [&](double u) {
        return oracle::integrate(
            [&](double s) { return fock1_density((s + u) / std::sqrt(2.0)) * fock1_density((s - u) / std::sqrt(2.0)); },
            -12.0, 12.0, 96);
      },
      -delta, delta, 8);
}

}  // namespace

TEST(Growth, AcceptanceMatchesQuadrature) {
  for (double delta : {0.05, 0.2, 0.7, 1.5}) {
    const auto step = grow_step(single_photon(), delta);
    EXPECT_NEAR(step.probability, fock1_acceptance(delta), 1e-10) << "delta=" << delta;
  }
}

TEST(Growth, SmallIntervalApproachesIdealGrownState) {
  const auto step = grow_step(single_photon(), 1e-3);
  EXPECT_GT(fidelity(step.state, single_mode(targets::ideal_grown(1))), 0.99999);
  // P ~ 2 delta rho_u(0)
  const double rho0 = oracle::integrate(
      [](double s) { return fock1_density(s / std::sqrt(2.0)) * fock1_density(s / std::sqrt(2.0)); }, -12, 12, 96);
  EXPECT_NEAR(step.probability / 2e-3, rho0, 1e-6 * rho0);
}

TEST(Growth, WideIntervalTracesTheMeasuredMode) {
  const auto step = grow_step(single_photon(), 40.0);
  EXPECT_NEAR(step.probability, 1.0, 1e-12);
  // Hong-Ou-Mandel: the kept output is (|0><0| + |2><2|) / 2.
  EXPECT_NEAR(overlap(step.state, fock(2)), 0.5, 1e-10);
  EXPECT_NEAR(overlap(step.state, vacuum()), 0.5, 1e-10);
  EXPECT_NEAR(overlap(step.state, single_photon()), 0.0, 1e-10);
}

TEST(Growth, AcceptanceIsMonotoneInHalfWidth) {
  double prev = 0.0;
  for (double d = 0.05; d < 3.0; d *= 1.4) {
    const double p = grow_step(single_photon(), d).probability;
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(Growth, OutputsStayEvenAndDegreeAtMostDoubles) {
  PhaseSpaceState w = single_photon();
  for (double d : {0.3, 0.5, 0.8}) {
    const auto next = grow_step(w, d).state;
    EXPECT_LE(next.degree(0), 2 * w.degree(0));
    const int deg = next.degree(0);
    for (int i = 0; i <= deg; ++i)
      for (int j = 0; j <= deg; ++j)
        if ((i + j) % 2 == 1) EXPECT_EQ(next.coeffs()[i * (deg + 1) + j], 0.0);
    EXPECT_NEAR(total_integral(next), 1.0, 1e-12);
    w = next;
  }
}

TEST(Growth, ScheduleRateAndFidelity) {
  const auto r = grow_schedule(single_photon(), {2, {0.4, 0.6}, {}});
  ASSERT_EQ(r.schedule.probs.size(), 2u);
  EXPECT_NEAR(r.rate, 1.5 * r.schedule.probs[0] * r.schedule.probs[1], 1e-15);
  EXPECT_GT(r.fidelity, 0.9);
  EXPECT_LT(r.fidelity, 1.0);
  EXPECT_DOUBLE_EQ(growth_rate({3, {}, {0.5, 0.4, 0.2}}), 1.5 * 1.5 * 0.04);
}

TEST(Growth, InvalidSchedulesAreRejected) {
  EXPECT_THROW(grow_step(single_photon(), 0.0), std::invalid_argument);
  EXPECT_THROW(grow_step(single_photon(), -1.0), std::invalid_argument);
  EXPECT_THROW(grow_schedule(single_photon(), {2, {0.5}, {}}), std::invalid_argument);
  EXPECT_THROW(grow_schedule(single_photon(), {2, {0.6, 0.5}, {}}), std::invalid_argument);
  EXPECT_THROW(growth_rate({1, {0.5}, {}}), std::invalid_argument);
}

TEST(Growth, ParetoFrontDominatesUniformFamily) {
  // Same half-width grid for both, so every uniform schedule was also searched.
  GrowthGrid grid;
  grid.points = 10;
  grid.uniform_points = 10;
  const auto set = optimize_schedule(2, 0.0, grid);
  ASSERT_FALSE(set.optimal.empty());
  for (std::size_t k = 1; k < set.optimal.size(); ++k) {
    EXPECT_GT(set.optimal[k].rate, set.optimal[k - 1].rate);
    EXPECT_LT(set.optimal[k].fidelity, set.optimal[k - 1].fidelity);
  }
  for (const auto& u : set.uniform) {
    bool dominated = false;
    for (const auto& o : set.optimal)
      dominated |= o.rate >= u.rate * (1.0 - 1e-12) && o.fidelity >= u.fidelity - 1e-12;
    EXPECT_TRUE(dominated) << "rate " << u.rate << " F " << u.fidelity;
  }
  EXPECT_FALSE(rate_at_fidelity(set.optimal, 0.99999).has_value());
}

TEST(Growth, SingleIterationHasNoScheduleFreedom) {
  GrowthGrid grid;
  grid.points = 12;
  const auto set = optimize_schedule(1, 0.0, grid);
  const double f = 0.9;
  const auto o = rate_at_fidelity(set.optimal, f);
  const auto u = rate_at_fidelity(set.uniform, f);
  ASSERT_TRUE(o && u);
  EXPECT_NEAR(*o / *u, 1.0, 0.02);
}
