#pragma once

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "hqr/density.hpp"

namespace hqr {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Independent stream seed for task `stream` under `root`.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return splitmix64(root ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
}

// Uniform on [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Inverse-CDF draw from a PolyGaussDensity restricted to [lo, hi]. The CDF is
// closed-form, so the only approximation is the root tolerance.
inline double sample(const PolyGaussDensity& f, Rng& rng, double lo = -kInf, double hi = kInf) {
  // Beyond |x| = 60 every term x^n e^{-x^2} with n <= 256 is below 1e-1000.
  constexpr double kReach = 60.0;
  const double a = std::max(lo, -kReach);
  const double b = std::min(hi, kReach);
  if (!(a < b)) throw std::invalid_argument("sample: empty range");
  const double total = f.mass(a, b);
  if (!(total > 0.0)) throw std::domain_error("sample: no probability mass in range");
  const double u = uniform01(rng) * total;
  auto g = [&](double x) { return f.mass(a, x) - u; };
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(g, a, b, -u, total - u,
                                                   boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace hqr
