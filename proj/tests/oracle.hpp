// Brute-force numerical references used to check closed-form results.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

struct Rule {
  std::vector<double> nodes, weights;
};

// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline Rule gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Composite Gauss-Legendre over [a, b] split into `panels` pieces.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        int panels = 64, int order = 24) {
  static const Rule rule = gauss_legendre(24);
  const Rule& r = order == 24 ? rule : gauss_legendre(order);
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * h;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      acc += r.weights[i] * 0.5 * h * f(lo + 0.5 * h * (r.nodes[i] + 1.0));
  }
  return acc;
}

// Tensor-product rule over the box [-L, L]^dim; f takes the point.
inline double integrate_box(const std::function<double(const std::vector<double>&)>& f, int dim,
                            double half_width, int panels, int order = 12) {
  const Rule r = gauss_legendre(order);
  std::vector<double> x, w;
  const double h = 2.0 * half_width / panels;
  for (int k = 0; k < panels; ++k)
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      x.push_back(-half_width + k * h + 0.5 * h * (r.nodes[i] + 1.0));
      w.push_back(0.5 * h * r.weights[i]);
    }
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> pt(dim);
  double acc = 0.0;
  while (true) {
    double wt = 1.0;
    for (int d = 0; d < dim; ++d) {
      pt[d] = x[idx[d]];
      wt *= w[idx[d]];
    }
    acc += wt * f(pt);
    int d = dim - 1;
    while (d >= 0 && ++idx[d] == n) idx[d--] = 0;
    if (d < 0) break;
  }
  return acc;
}

// n-point Gauss-Hermite rule for weight e^{-x^2}, via the orthonormal recursion.
inline Rule gauss_hermite(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -1.0 / 6);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * r.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * r.nodes[1];
    else
      z = 2.0 * z - r.nodes[i - 2];
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    r.nodes[i] = z;
    r.weights[i] = 2.0 / (pp * pp);
  }
  return r;
}

// \int_{R^dim} f(x) e^{-a |x|^2} dx with an n-point Hermite rule per axis.
inline double hermite_box(const std::function<double(const std::vector<double>&)>& poly, int dim,
                          double a, int n) {
  const Rule r = gauss_hermite(n);
  const double scale = 1.0 / std::sqrt(a);
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> pt(dim);
  double acc = 0.0;
  while (true) {
    double wt = 1.0;
    for (int d = 0; d < dim; ++d) {
      pt[d] = r.nodes[idx[d]] * scale;
      wt *= r.weights[idx[d]] * scale;
    }
    acc += wt * poly(pt);
    int d = dim - 1;
    while (d >= 0 && ++idx[d] == static_cast<std::size_t>(n)) idx[d--] = 0;
    if (d < 0) break;
  }
  return acc;
}

}  // namespace oracle
