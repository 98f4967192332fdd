#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "hqr/sampling.hpp"
#include "hqr/target_state.hpp"

using namespace hqr;

TEST(Sampling, DerivedSeedsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(42, s));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
  EXPECT_NE(derive_seed(42, 7), derive_seed(43, 7));
}

TEST(Sampling, Uniform01UsesTopBits) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(rng);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

// Kolmogorov-Smirnov against the closed-form CDF; 1.63 / sqrt(n) is the 1% level.
TEST(Sampling, InverseCdfDrawsPassKolmogorovSmirnov) {
  const auto f = marginal_density(wigner(single_mode(targets::ideal_grown(2))), 0, Quadrature::Position);
  const int n = 3000;
  Rng rng(derive_seed(2024, 0));
  std::vector<double> xs(n);
  for (auto& x : xs) x = sample(f, rng);
  std::sort(xs.begin(), xs.end());
  const double total = f.total_mass();
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = f.mass(-kInf, xs[i]) / total;
    d = std::max({d, std::abs(cdf - static_cast<double>(i) / n), std::abs(cdf - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST(Sampling, RestrictedRangeStaysInside) {
  const auto f = marginal_density(single_photon(), 0, Quadrature::Position);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double x = sample(f, rng, -0.3, 0.5);
    EXPECT_GE(x, -0.3);
    EXPECT_LE(x, 0.5);
  }
  EXPECT_THROW(sample(f, rng, 1.0, 1.0), std::invalid_argument);
}
