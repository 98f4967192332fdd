#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hqr {

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
  double rms = 0.0;  // residual root-mean-square
};

// Ordinary least squares y = intercept + slope * x.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit: need two or more paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss / syy : 1.0;
  f.rms = std::sqrt(ss / static_cast<double>(n));
  return f;
}

// F = 1 - c e^{d R} by least squares on F, started from the line through
// log(1 - F). rms is measured on F.
struct ExpFit {
  double c = 0.0;
  double d = 0.0;
  double rms = 0.0;
};

inline ExpFit exp_deficit_fit(const std::vector<double>& r, const std::vector<double>& f) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (f[i] < 1.0) {
      lx.push_back(r[i]);
      ly.push_back(std::log(1.0 - f[i]));
    }
  const auto lin = linear_fit(lx, ly);
  auto sse = [&](double lc, double d) {
    double ss = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double res = f[i] - (1.0 - std::exp(lc + d * r[i]));
      ss += res * res;
    }
    return ss;
  };
  // Levenberg-Marquardt in (log c, d).
  double lc = lin.intercept, d = lin.slope, lambda = 1e-3;
  double cur = sse(lc, d);
  for (int it = 0; it < 200; ++it) {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double e = std::exp(lc + d * r[i]);
      const double res = f[i] - (1.0 - e);
      const double j1 = e, j2 = e * r[i];  // d(res)/d(lc), d(res)/d(d)
      a11 += j1 * j1;
      a12 += j1 * j2;
      a22 += j2 * j2;
      g1 += j1 * res;
      g2 += j2 * res;
    }
    // (J^T J + lambda diag) s = -J^T res
    const double b11 = a11 * (1.0 + lambda), b22 = a22 * (1.0 + lambda);
    const double det = b11 * b22 - a12 * a12;
    if (!(std::abs(det) > 0.0)) break;
    const double s1 = -(b22 * g1 - a12 * g2) / det;
    const double s2 = -(b11 * g2 - a12 * g1) / det;
    const double next = sse(lc + s1, d + s2);
    if (next < cur) {
      const bool done = cur - next < 1e-15 * (1.0 + cur);
      lc += s1;
      d += s2;
      cur = next;
      lambda *= 0.3;
      if (done) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  return {std::exp(lc), d, std::sqrt(cur / static_cast<double>(r.size()))};
}

}  // namespace hqr
