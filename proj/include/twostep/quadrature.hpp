#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace twostep {

struct QuadPoint1D {
  double x;
  double w;
};

/// Gauss-Legendre rule on [-1, 1] with n points (Newton iteration on P_n).
inline std::vector<QuadPoint1D> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  if (n == 1) return {{0.0, 2.0}};
  std::vector<QuadPoint1D> pts(static_cast<std::size_t>(n));
  const double pi = std::acos(-1.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
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
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    pts[static_cast<std::size_t>(i)] = {-x, w};
    pts[static_cast<std::size_t>(n - 1 - i)] = {x, w};
  }
  if (n % 2 == 1) pts[static_cast<std::size_t>(n / 2)].x = 0.0;
  return pts;
}

struct QuadPoint3D {
  std::array<double, 3> xi;
  double w;
};

/// Tensor-product rule on [-1,1]^3.
inline std::vector<QuadPoint3D> gauss_hex(int n) {
  const auto g = gauss_legendre(n);
  std::vector<QuadPoint3D> out;
  out.reserve(g.size() * g.size() * g.size());
  for (const auto& c : g)
    for (const auto& b : g)
      for (const auto& a : g) out.push_back({{a.x, b.x, c.x}, a.w * b.w * c.w});
  return out;
}

}  // namespace twostep
