#include <gtest/gtest.h>

#include <cmath>

#include "hqr/target_state.hpp"
#include "oracle.hpp"

using namespace hqr;

namespace {

Wavefunction hermite_function(int n) {
  // Fock wavefunctions up to n = 2 in the kernel form.
  const double c = std::pow(kPi, -0.25);
  if (n == 0) return Wavefunction::monomial(0, c);
  if (n == 1) return Wavefunction::monomial(1, c * std::sqrt(2.0));
  return Wavefunction::monomial(2, c * std::sqrt(2.0)) + Wavefunction::monomial(0, -c / std::sqrt(2.0));
}

cplx quad_inner(const Wavefunction& a, const Wavefunction& b) {
  auto f = [&](double x, bool im) {
    const cplx v = std::conj(a(x)) * b(x);
    return im ? v.imag() : v.real();
  };
  return {oracle::integrate([&](double x) { return f(x, false); }, -15, 15, 256),
          oracle::integrate([&](double x) { return f(x, true); }, -15, 15, 256)};
}

}  // namespace

TEST(TargetState, InnerProductMatchesQuadrature) {
  const auto a = targets::squeezed_single_cat(2) + Wavefunction::monomial(3, cplx(0.2, 0.1));
  const auto b = targets::coherent(0.9) * cplx(0.3, -0.4) + targets::ideal_grown(2);
  const cplx got = inner(a, b);
  const cplx want = quad_inner(a, b);
  EXPECT_NEAR(got.real(), want.real(), 1e-12);
  EXPECT_NEAR(got.imag(), want.imag(), 1e-12);
}

TEST(TargetState, ReferenceStatesAreNormalized) {
  for (int m = 1; m <= 5; ++m) {
    EXPECT_NEAR(inner(targets::ideal_grown(m), targets::ideal_grown(m)).real(), 1.0, 1e-12);
    EXPECT_NEAR(inner(targets::logical_zero(m), targets::logical_zero(m)).real(), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(inner(targets::logical_zero(m), targets::logical_one(m))), 0.0, 1e-15);
    EXPECT_NEAR(inner(targets::psi_m(m), targets::psi_m(m)).real(), 1.0, 1e-12);
  }
}

TEST(TargetState, WignerOfFockWavefunctionsMatchesClosedForm) {
  for (int n = 0; n <= 2; ++n) {
    const auto w = wigner(single_mode(hermite_function(n)));
    const auto ref = fock(n);
    ASSERT_EQ(w.degree(0), ref.degree(0));
    for (std::size_t f = 0; f < w.size(); ++f) EXPECT_NEAR(w.coeffs()[f], ref.coeffs()[f], 1e-14);
  }
}

TEST(TargetState, WignerOfCatLikeStateIsPureAndRealizesMarginal) {
  const auto psi = targets::ideal_grown(2);
  const auto w = wigner(single_mode(psi));
  EXPECT_NEAR(purity(w), 1.0, 1e-11);
  const auto marg = marginal_density(w, 0, Quadrature::Position);
  for (double x : {-2.0, -0.3, 0.0, 1.1}) EXPECT_NEAR(marg(x), std::norm(psi(x)), 1e-12);
}

TEST(TargetState, FidelityAgainstOwnWignerIsOne) {
  for (int m = 1; m <= 3; ++m) {
    const auto t = targets::psi_m(m);
    EXPECT_NEAR(fidelity(wigner(t), t), 1.0, 1e-9) << "m=" << m;
  }
}

TEST(TargetState, FidelityWithNonKernelTargets) {
  const double alpha = 0.7;
  // |<alpha|1>|^2 = e^{-alpha^2} alpha^2
  EXPECT_NEAR(fidelity(single_photon(), single_mode(targets::coherent(alpha))),
              std::exp(-alpha * alpha) * alpha * alpha, 1e-13);
  // Mixed state: fidelity is linear in rho.
  const auto lossy = loss_channel(fock(2), 0, 0.6);
  const double p1 = 2 * 0.6 * 0.4;
  EXPECT_NEAR(fidelity(lossy, single_mode(hermite_function(1))), p1, 1e-13);
}

TEST(TargetState, FidelityMatchesOverlapForPureStates) {
  const auto t = targets::squeezed_two_mode_cat(2, kPi / 2);
  const auto psi = targets::psi_m(2);
  EXPECT_NEAR(fidelity(wigner(psi), t), overlap(psi, t), 1e-9);
}

TEST(TargetState, DensityMatrixInLogicalBasis) {
  const int m = 2;
  const auto rho = density_matrix_in_basis(
      wigner(targets::psi_m(m)), {{targets::logical_zero(m), targets::logical_one(m)},
                                  {targets::logical_zero(m), targets::logical_one(m)}});
  // |01> and |10> components only, each 1/2, fully coherent.
  EXPECT_NEAR(rho(1, 1).real(), 0.5, 1e-9);
  EXPECT_NEAR(rho(2, 2).real(), 0.5, 1e-9);
  EXPECT_NEAR(rho(1, 2).real(), 0.5, 1e-9);
  EXPECT_NEAR(std::abs(rho(0, 0)), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(rho(3, 3)), 0.0, 1e-9);
}

TEST(TargetState, ReducedPurityOfProductAndBellStates) {
  EXPECT_NEAR(reduced_purity(targets::psi_m(2)), 0.5, 1e-12);
  TargetState prod(2);
  prod.add(1.0, {targets::coherent(0.3), targets::squeezed_single_cat(2)});
  EXPECT_NEAR(reduced_purity(prod), 1.0, 1e-12);
}
