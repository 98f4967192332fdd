#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "hqr/gaussian_integrals.hpp"

namespace hqr {

// One-dimensional density f(x) = sum_n c_n x^n e^{-x^2}: the shape of every
// quadrature marginal of a PhaseSpaceState.
class PolyGaussDensity {
 public:
  PolyGaussDensity() = default;
  explicit PolyGaussDensity(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  std::span<const double> coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }

  double operator()(double x) const {
    if (c_.empty()) return 0.0;
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc * std::exp(-x * x);
  }

  // \int_lo^hi f(x) dx; either bound may be infinite.
  double mass(double lo, double hi) const {
    double acc = 0.0;
    for (std::size_t n = 0; n < c_.size(); ++n) {
      if (c_[n] != 0.0) acc += c_[n] * range_moment(static_cast<int>(n), lo, hi);
    }
    return acc;
  }

  double total_mass() const { return mass(-kInf, kInf); }

  // \int x^k f(x) dx over the real line.
  double moment(int k) const {
    double acc = 0.0;
    for (std::size_t n = 0; n < c_.size(); ++n) {
      if (c_[n] != 0.0) acc += c_[n] * full_moment(static_cast<int>(n) + k);
    }
    return acc;
  }

  PolyGaussDensity normalized() const {
    const double m = total_mass();
    if (!(m > 0.0)) throw std::domain_error("PolyGaussDensity: non-positive total mass");
    std::vector<double> c = c_;
    for (auto& v : c) v /= m;
    return PolyGaussDensity(std::move(c));
  }

 private:
  std::vector<double> c_;
};

}  // namespace hqr
