#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hqr/phase_space_state.hpp"
#include "oracle.hpp"

using namespace hqr;

namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::max(std::abs(want), 1e-12));
}

double eval2(const PhaseSpaceState& w, double x0, double p0, double x1, double p1) {
  const double pt[] = {x0, p0, x1, p1};
  return evaluate(w, pt);
}

}  // namespace

TEST(GaussianIntegrals, IntervalMomentMatchesQuadrature) {
  for (int n = 0; n <= 40; n += 2)
    for (double t : {0.01, 0.1, 0.5, 1.0, 2.5, 6.0}) {
      const double want =
          oracle::integrate([n](double x) { return std::pow(x, n) * std::exp(-x * x); }, -t, t);
      EXPECT_LT(rel_err(interval_moment(n, t), want), 1e-10) << "n=" << n << " t=" << t;
    }
  EXPECT_EQ(interval_moment(3, 1.0), 0.0);
  EXPECT_NEAR(interval_moment(0, kInf), kSqrtPi, 1e-15);
}

TEST(GaussianIntegrals, HalfLineAndRangeMoments) {
  for (int n = 0; n <= 9; ++n)
    for (auto [lo, hi] : {std::pair{-1.3, 0.4}, std::pair{0.2, 2.0}, std::pair{-3.0, -0.5}}) {
      const double want = oracle::integrate(
          [n](double x) { return std::pow(x, n) * std::exp(-x * x); }, lo, hi);
      EXPECT_NEAR(range_moment(n, lo, hi), want, 1e-12 * std::max(1.0, std::abs(want)));
    }
}

TEST(GaussianIntegrals, ShiftedMomentComplexShift) {
  const cplx b(0.7, -1.1);
  const double a = 1.6;
  for (int n = 0; n <= 12; ++n) {
    auto f = [&](double x, bool im) {
      const cplx v = std::pow(x, n) * std::exp(-a * x * x + b * x);
      return im ? v.imag() : v.real();
    };
    const double re = oracle::integrate([&](double x) { return f(x, false); }, -12, 12, 128);
    const double imv = oracle::integrate([&](double x) { return f(x, true); }, -12, 12, 128);
    const cplx got = shifted_moment(n, a, b);
    EXPECT_NEAR(got.real(), re, 1e-11 * std::max(1.0, std::abs(re)));
    EXPECT_NEAR(got.imag(), imv, 1e-11 * std::max(1.0, std::abs(imv)));
  }
}

TEST(PhaseSpaceState, FockStatesAreNormalizedPureAndOrthogonal) {
  for (int n = 0; n <= 2; ++n) {
    EXPECT_NEAR(total_integral(fock(n)), 1.0, 1e-14);
    EXPECT_NEAR(purity(fock(n)), 1.0, 1e-13);
    for (int m = 0; m < n; ++m) EXPECT_NEAR(overlap(fock(n), fock(m)), 0.0, 1e-14);
  }
}

TEST(PhaseSpaceState, OverlapMatchesQuadrature) {
  const auto a = tensor(fock(2), single_photon());
  const auto b = beam_splitter(tensor(single_photon(), fock(2)), 0, 1, 0.4);
  // Product of the two Wigner functions is a polynomial times e^{-2|r|^2}.
  const double want =
      std::pow(2 * kPi, 2) *
      oracle::hermite_box(
          [&](const std::vector<double>& p) {
            const double g = std::exp(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]);
            return eval2(a, p[0], p[1], p[2], p[3]) * eval2(b, p[0], p[1], p[2], p[3]) * g * g;
          },
          4, 2.0, 12);
  EXPECT_GT(std::abs(want), 1e-3);
  EXPECT_NEAR(overlap(a, b), want, 1e-12);
}

TEST(PhaseSpaceState, BeamSplitterIsCoordinateRotation) {
  const auto in = tensor(fock(2), single_photon());
  const double theta = 0.83;
  const auto out = beam_splitter(in, 0, 1, theta);
  const double c = std::cos(theta), s = std::sin(theta);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    const double x0 = u(rng), p0 = u(rng), x1 = u(rng), p1 = u(rng);
    const double want = eval2(in, c * x0 + s * x1, c * p0 + s * p1, c * x1 - s * x0, c * p1 - s * p0);
    EXPECT_NEAR(eval2(out, x0, p0, x1, p1), want, 1e-13);
  }
  // Reversed mode order is the inverse-angle rotation with roles swapped.
  const auto rev = beam_splitter(in, 1, 0, -theta);
  for (std::size_t f = 0; f < out.size(); ++f) EXPECT_NEAR(rev.coeffs()[f], out.coeffs()[f], 1e-15);
}

TEST(PhaseSpaceState, HongOuMandelSuppressesCoincidence) {
  const auto out = beam_splitter(tensor(single_photon(), single_photon()), 0, 1, kPi / 4);
  EXPECT_NEAR(overlap(out, tensor(single_photon(), single_photon())), 0.0, 1e-13);
  EXPECT_NEAR(overlap(out, tensor(fock(2), vacuum())), 0.5, 1e-13);
  EXPECT_NEAR(purity(out), 1.0, 1e-13);
}

TEST(PhaseSpaceState, LossMixesWithVacuum) {
  const double eta = 0.37;
  const auto lossy = loss_channel(single_photon(), 0, eta);
  for (std::size_t f = 0; f < lossy.size(); ++f) {
    const double want = eta * single_photon().coeffs()[f] +
                        (f == 0 ? (1 - eta) * vacuum().coeffs()[0] : 0.0);
    EXPECT_NEAR(lossy.coeffs()[f], want, 1e-15);
  }
  const auto two = loss_channel(fock(2), 0, eta);
  // Binomial photon statistics.
  EXPECT_NEAR(overlap(two, fock(2)), eta * eta, 1e-13);
  EXPECT_NEAR(overlap(two, fock(1)), 2 * eta * (1 - eta), 1e-13);
  EXPECT_NEAR(overlap(two, fock(0)), (1 - eta) * (1 - eta), 1e-13);
}

TEST(PhaseSpaceState, IntervalMeasurementMatchesQuadrature) {
  const auto w = beam_splitter(tensor(fock(2), single_photon()), 0, 1, 0.6);
  const double delta = 0.35;
  const auto res = measure_x_interval(w, 1, delta);
  const auto marg = marginal_density(w, 1, Quadrature::Position);
  const double want_prob = oracle::integrate([&](double x) { return marg(x); }, -delta, delta);
  EXPECT_NEAR(res.probability, want_prob, 1e-12);
  EXPECT_NEAR(total_integral(res.state), 1.0, 1e-13);
  EXPECT_NEAR(res.state.weight(), want_prob, 1e-12);
}

TEST(PhaseSpaceState, MarginalDensityMatchesDirectIntegration) {
  const auto w = beam_splitter(tensor(fock(2), single_photon()), 0, 1, 0.6);
  const auto marg = marginal_density(w, 0, Quadrature::Momentum);
  for (double v : {-1.2, 0.0, 0.4, 2.1}) {
    const double want =
        oracle::hermite_box(
            [&](const std::vector<double>& p) {
              return eval2(w, p[0], v, p[1], p[2]) *
                     std::exp(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            },
            3, 1.0, 12);
    EXPECT_NEAR(marg(v), want, 1e-11);
  }
}

TEST(PhaseSpaceState, ConditioningOnPointOutcome) {
  const auto w = beam_splitter(tensor(fock(2), vacuum()), 0, 1, 0.5);
  const auto res = condition_quadrature(w, 1, Quadrature::Position, 0.3);
  const auto marg = marginal_density(w, 1, Quadrature::Position);
  EXPECT_NEAR(res.probability, marg(0.3), 1e-13);
  EXPECT_NEAR(total_integral(res.state), 1.0, 1e-13);
  EXPECT_LE(purity(res.state), 1.0 + 1e-12);
}

TEST(PhaseSpaceState, TrimDropsUnusedPowers) {
  PhaseSpaceState w({6});
  w.at({0, 0}) = 1.0 / kPi;
  const auto t = trimmed(w);
  EXPECT_EQ(t.degree(0), 0);
  EXPECT_NEAR(t.coeffs()[0], 1.0 / kPi, 0.0);
}

TEST(PhaseSpaceState, PartialTraceOfProductRecoversFactor) {
  const auto w = tensor(single_photon(), fock(2));
  const auto r = partial_trace(w, 0);
  EXPECT_NEAR(overlap(r, fock(2)), 1.0, 1e-13);
}
