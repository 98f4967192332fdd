#include <gtest/gtest.h>

#include <cmath>

#include "hqr/swap.hpp"

using namespace hqr;

namespace {

const PhaseSpaceState& psi(int m) {
  static const PhaseSpaceState w[4] = {{}, wigner(targets::psi_m(1)), wigner(targets::psi_m(2)),
                                       wigner(targets::psi_m(3))};
  return w[m];
}

// Modes after the beam splitter: l0, u (X measured), v (P measured), r1.
PhaseSpaceState generic_swap(const PhaseSpaceState& l, const PhaseSpaceState& r) {
  return beam_splitter(tensor(l, r), 1, 2, kPi / 4);
}

}  // namespace

TEST(Swap, MeasurementMatchesGenericBeamSplitter) {
  const auto& w = psi(1);
  const SwapMeasurement meas(w, w);
  const auto full = generic_swap(w, w);
  const auto xm = marginal_density(full, 1, Quadrature::Position);
  for (double d : {0.05, 0.4, 1.3}) EXPECT_NEAR(meas.success_probability(d), xm.mass(-d, d), 1e-12);

  for (auto [x0, p0] : {std::pair{0.1, 0.4}, std::pair{-0.35, -1.2}}) {
    const auto cx = condition_quadrature(full, 1, Quadrature::Position, x0);
    const auto cp = condition_quadrature(cx.state, 1, Quadrature::Momentum, p0);
    EXPECT_NEAR(meas.x_density()(x0), cx.probability, 1e-12);
    EXPECT_NEAR(meas.p_density(x0)(p0), cx.probability * cp.probability, 1e-12);
    const auto fast = meas.conditional_state(x0, p0);
    const auto slow = trimmed(cp.state);
    ASSERT_EQ(fast.degrees(), slow.degrees());
    for (std::size_t f = 0; f < fast.size(); ++f) EXPECT_NEAR(fast.coeffs()[f], slow.coeffs()[f], 1e-12);
  }
}

TEST(Swap, JointPDensityIntegratesToXDensity) {
  const SwapMeasurement meas(psi(2), psi(2));
  for (double x0 : {0.0, 0.2, 0.9}) EXPECT_NEAR(meas.p_density(x0).total_mass(), meas.x_density()(x0), 1e-12);
  EXPECT_NEAR(meas.x_density().total_mass(), 1.0, 1e-12);
}

TEST(Swap, SuccessProbabilityLimitsAndMonotonicity) {
  const SwapMeasurement meas(psi(3), psi(3));
  EXPECT_EQ(meas.success_probability(0.0), 0.0);
  EXPECT_NEAR(meas.success_probability(60.0), 1.0, 1e-12);
  double prev = 0.0;
  for (double d = 0.01; d < 4.0; d *= 1.5) {
    const double p = meas.success_probability(d);
    EXPECT_GE(p, prev);
    prev = p;
  }
  EXPECT_THROW(meas.success_probability(-0.1), std::invalid_argument);
  Rng rng(1);
  EXPECT_THROW(swap_once(meas, 0.0, rng), std::invalid_argument);
  EXPECT_THROW(swap_once(meas, 1e-9, rng), std::domain_error);
}

TEST(Swap, AcceptedOutcomesLieInsideTheInterval) {
  Rng rng(derive_seed(5, 0));
  const SwapMeasurement meas(psi(1), psi(1));
  for (int i = 0; i < 20; ++i) {
    const auto o = swap_once(meas, 0.15, rng);
    EXPECT_TRUE(o.accepted);
    EXPECT_LE(std::abs(o.x0), 0.15);
    ASSERT_TRUE(o.state.has_value());
    EXPECT_NEAR(total_integral(*o.state), 1.0, 1e-12);
    EXPECT_GE(o.draws, 1);
  }
}

TEST(Swap, PsiMIsAFamilyMember) {
  for (int m = 1; m <= 3; ++m) EXPECT_GT(pair_fidelity(psi(m), m, psi_pair()), 0.999) << "m=" << m;
}

TEST(Swap, EveryFamilyTargetCarriesOneEbit) {
  Rng rng(11);
  std::uniform_real_distribution<double> x(-1.0, 1.0), th(0.0, 2.0 * kPi);
  for (int k = 0; k < 40; ++k) {
    const int m = 1 + k % 3;
    PairMatrix pm = psi_pair();
    for (int level = 0; level < 1 + k % 4; ++level) pm = fold_swap(pm, pm, m, x(rng)).at(th(rng));
    EXPECT_NEAR(2.0 * (std::norm(pm.alpha) + std::norm(pm.beta)), 1.0, 1e-12);
    EXPECT_NEAR(reduced_purity(phi_target(m, pm)), 0.5, 1e-6);
  }
}

TEST(Swap, FidelityIsEvenInP0WithTrivialHistory) {
  const SwapMeasurement meas(psi(1), psi(1));
  const auto c = swap_p_curve(meas, 1, psi_pair(), 0.12, {-1.1, -0.4, 0.4, 1.1}, 1);
  EXPECT_NEAR(c[0].optimized, c[3].optimized, 1e-6);
  EXPECT_NEAR(c[1].optimized, c[2].optimized, 1e-6);
  EXPECT_NEAR(c[0].fixed, c[3].fixed, 1e-6);
  EXPECT_NEAR(c[0].density, c[3].density, 1e-12);
}

TEST(Swap, OptimizedFidelityBoundsTheFixedPhase) {
  const SwapMeasurement meas(psi(2), psi(2));
  for (const auto& p : swap_p_curve(meas, 2, psi_pair(), 0.0, {-1.5, -0.7, 0.0, 0.3, 1.2}, 1)) {
    EXPECT_GE(p.optimized, p.fixed - 1e-12);
    EXPECT_LE(p.optimized, 1.0 + 1e-9);
  }
}

TEST(Swap, ThetaSearchConvergesAt720Points) {
  Rng rng(derive_seed(9, 0));
  const SwapMeasurement meas(psi(2), psi(2));
  for (int k = 0; k < 5; ++k) {
    const auto o = swap_once(meas, 0.3, rng);
    const auto coeffs = fold_swap(psi_pair(), psi_pair(), 2, o.x0);
    const auto rho = logical_density_matrix(*o.state, 2);
    EXPECT_NEAR(target_fidelity(rho, coeffs).fidelity, target_fidelity(rho, coeffs, 8 * kThetaGrid).fidelity, 1e-4);
  }
}

TEST(Swap, MonteCarloIsDeterministicAndThreadIndependent) {
  const auto a = mc_average_fidelity(psi(1), psi(1), 0.3, 1, psi_pair(), psi_pair(), 30, 77, 1);
  const auto b = mc_average_fidelity(psi(1), psi(1), 0.3, 1, psi_pair(), psi_pair(), 30, 77, 3);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.sem, b.sem);
  const auto c = mc_average_fidelity(psi(1), psi(1), 0.3, 1, psi_pair(), psi_pair(), 30, 78, 1);
  EXPECT_NE(a.mean, c.mean);
}

TEST(Swap, TenfoldSamplesAgreeWithinThreeStandardErrors) {
  const auto small = mc_average_fidelity(psi(1), psi(1), 0.3, 1, psi_pair(), psi_pair(), 100, 1);
  const auto big = mc_average_fidelity(psi(1), psi(1), 0.3, 1, psi_pair(), psi_pair(), 1000, 2);
  EXPECT_LT(std::abs(small.mean - big.mean), 3.0 * std::hypot(small.sem, big.sem));
}

TEST(Swap, MeanFidelityDecreasesWithHalfWidth) {
  const auto narrow = mc_average_fidelity(psi(1), psi(1), 0.05, 1, psi_pair(), psi_pair(), 200, 3);
  const auto wide = mc_average_fidelity(psi(1), psi(1), 1.5, 1, psi_pair(), psi_pair(), 200, 3);
  EXPECT_GT(narrow.mean - wide.mean, 3.0 * std::hypot(narrow.sem, wide.sem));
  EXPECT_LT(narrow.p_success, wide.p_success);
}

TEST(Swap, NestedSwapLevels) {
  Rng rng(4);
  const auto zero = nested_swap(psi(1), 0, 0.2, 1, rng);
  EXPECT_NEAR(zero.fidelity, pair_fidelity(psi(1), 1, psi_pair()), 1e-15);
  EXPECT_TRUE(zero.levels.empty());
  const auto two = nested_swap(psi(1), 2, 0.2, 1, rng);
  ASSERT_EQ(two.levels.size(), 2u);
  ASSERT_EQ(two.p_success.size(), 2u);
  EXPECT_EQ(two.levels[1].level, 2);
  EXPECT_NEAR(two.fidelity, two.levels[1].fidelity, 0.0);
  EXPECT_THROW(nested_swap(psi(1), 5, 0.2, 1, rng), std::invalid_argument);
}
