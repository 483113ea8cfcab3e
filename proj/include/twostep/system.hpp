#pragma once

// Per-frequency linear systems of the two-step formulation.

#include <cmath>
#include <numbers>
#include <vector>

#include "twostep/assembly.hpp"
#include "twostep/gauge.hpp"

namespace twostep {

struct FrequencyPoint {
  double f_hz = 0.0;

  static FrequencyPoint hz(double f) {
    if (!(f >= 0.0)) throw InvalidArgument("frequency must be non-negative");
    return FrequencyPoint{f};
  }
  double omega() const { return 2.0 * std::numbers::pi * f_hz; }
};

inline constexpr double kSigmaArt = 1e-6;

struct ScalingFactors {
  double beta = 1.0;
  double gamma = 1.0;
  double sigma_art = kSigmaArt;
};

/// beta = 1 + omega,  gamma = (1 + omega)(max sigma + sigma_art) / max eps.
inline ScalingFactors scaling_factors(double omega, double sigma_max, double eps_max, double sigma_art = kSigmaArt) {
  if (!(eps_max > 0.0)) throw InvalidArgument("scaling_factors: max eps must be positive");
  ScalingFactors s;
  s.sigma_art = sigma_art;
  s.beta = 1.0 + omega;
  s.gamma = (1.0 + omega) * (sigma_max + sigma_art) / eps_max;
  return s;
}

inline ScalingFactors scaling_factors(double omega, const MaterialField& mat) {
  return scaling_factors(omega, mat.max_sigma(), mat.max_eps());
}

inline ComplexSparse combine(const RealSparse& a, cplx ca, const RealSparse& b, cplx cb) {
  ComplexSparse out = ca * a.cast<cplx>() + cb * b.cast<cplx>();
  out.makeCompressed();
  return out;
}

struct LinearSystem {
  ComplexSparse matrix;
  ComplexVector rhs;
};

/// K_kappa u = i omega q_s, with the Dirichlet lift moved to the right.
inline LinearSystem build_eqs_system(const MatrixBundle& b, double omega) {
  const cplx iw(0.0, omega);
  LinearSystem s;
  s.matrix = combine(b.K_sigma, 1.0, b.K_eps, iw);
  s.rhs = iw * b.q_s - (b.k_sigma_lift + iw * b.k_eps_lift);
  return s;
}

/// Static (omega = 0) limit of the EQS step: stationary current flow in the
/// conductor rows, electrostatics (the EQS rows divided by i omega) in air.
inline LinearSystem build_eqs_static_limit(const MatrixBundle& b) {
  const auto n = static_cast<Eigen::Index>(b.n_v());
  std::vector<Eigen::Triplet<cplx>> t;
  auto take_rows = [&](const RealSparse& a, bool conductor_rows) {
    for (Eigen::Index k = 0; k < a.outerSize(); ++k)
      for (RealSparse::InnerIterator it(a, k); it; ++it)
        if (b.scalar_conductor[static_cast<std::size_t>(it.row())] == conductor_rows)
          t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  };
  take_rows(b.K_sigma, true);
  take_rows(b.K_eps, false);
  LinearSystem s;
  s.matrix.resize(n, n);
  s.matrix.setFromTriplets(t.begin(), t.end());
  s.matrix.makeCompressed();
  s.rhs.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    s.rhs[i] = b.scalar_conductor[static_cast<std::size_t>(i)] ? -b.k_sigma_lift[i] : b.q_s[i] - b.k_eps_lift[i];
  return s;
}

/// W = C_nu + i omega M_sigma - omega^2 M_eps.
inline ComplexSparse build_curl_matrix(const MatrixBundle& b, double omega) {
  ComplexSparse w = b.C_nu.cast<cplx>() + cplx(0.0, omega) * b.M_sigma.cast<cplx>() - (omega * omega) * b.M_eps.cast<cplx>();
  w.makeCompressed();
  return w;
}

/// j(u) = j_s - G_kappa u  (u holds the free scalar DOFs; the lift is added).
inline ComplexVector build_rhs(const MatrixBundle& b, double omega, const ComplexVector& u) {
  const cplx iw(0.0, omega);
  ComplexVector gu = b.G_sigma.cast<cplx>() * u + iw * (b.G_eps.cast<cplx>() * u);
  gu += b.g_sigma_lift + iw * b.g_eps_lift;
  return b.j_s - gu;
}

/// Unscaled kappa-weighted weak divergence D_sigma + i omega D_eps.
inline ComplexSparse kappa_divergence(const MatrixBundle& b, double omega) {
  return combine(b.D_sigma, 1.0, b.D_eps, cplx(0.0, omega));
}

/// Region-split scaled gauge rows: beta (D_sigma + i omega D_eps) on rows of
/// conductor-touching nodes, gamma D_eps on rows of air-only nodes.
inline ComplexSparse build_scaled_divergence(const MatrixBundle& b, double omega, const ScalingFactors& s) {
  const ComplexSparse dk = kappa_divergence(b, omega);
  std::vector<Eigen::Triplet<cplx>> t;
  for (Eigen::Index k = 0; k < dk.outerSize(); ++k)
    for (ComplexSparse::InnerIterator it(dk, k); it; ++it)
      if (b.gauge_conductor[static_cast<std::size_t>(it.row())])
        t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), s.beta * it.value());
  for (Eigen::Index k = 0; k < b.D_eps.outerSize(); ++k)
    for (RealSparse::InnerIterator it(b.D_eps, k); it; ++it)
      if (!b.gauge_conductor[static_cast<std::size_t>(it.row())])
        t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), cplx(s.gamma * it.value()));
  ComplexSparse d(b.D_eps.rows(), b.D_eps.cols());
  d.setFromTriplets(t.begin(), t.end());
  d.makeCompressed();
  return d;
}

/// [[W, D^T], [D, 0]] [a; lambda] = [j; 0].
inline LinearSystem build_lagrange_system(const ComplexSparse& w, const ComplexSparse& d, const ComplexVector& rhs) {
  if (d.cols() != w.cols() || d.rows() > w.rows()) throw InvalidArgument("build_lagrange_system: dimension mismatch");
  const auto n = w.rows();
  const auto m = d.rows();
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(static_cast<std::size_t>(w.nonZeros() + 2 * d.nonZeros()));
  for (Eigen::Index k = 0; k < w.outerSize(); ++k)
    for (ComplexSparse::InnerIterator it(w, k); it; ++it) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (Eigen::Index k = 0; k < d.outerSize(); ++k)
    for (ComplexSparse::InnerIterator it(d, k); it; ++it) {
      t.emplace_back(static_cast<int>(n + it.row()), static_cast<int>(it.col()), it.value());
      t.emplace_back(static_cast<int>(it.col()), static_cast<int>(n + it.row()), it.value());
    }
  LinearSystem s;
  s.matrix.resize(n + m, n + m);
  s.matrix.setFromTriplets(t.begin(), t.end());
  s.matrix.makeCompressed();
  s.rhs = ComplexVector::Zero(n + m);
  s.rhs.head(n) = rhs;
  return s;
}

/// Tree-cotree stabilized system in [R | T] column order: the cotree rows of
/// W followed by the gauge rows, right-hand side [j^(R); 0]. The solution
/// must be mapped back with unorder().
inline LinearSystem build_stabilized_system(const ComplexSparse& w, const ComplexSparse& d, const ComplexVector& rhs,
                                            const TreeCotreePartition& p) {
  if (static_cast<std::size_t>(d.rows()) != p.num_tree())
    throw Error("build_stabilized_system: gauge rows (" + std::to_string(d.rows()) + ") != tree edges (" +
                std::to_string(p.num_tree()) + ")");
  if (static_cast<std::size_t>(w.rows()) != p.size()) throw InvalidArgument("build_stabilized_system: size mismatch");
  const auto nr = static_cast<Eigen::Index>(p.num_cotree());
  std::vector<Eigen::Triplet<cplx>> t;
  for (Eigen::Index k = 0; k < w.outerSize(); ++k)
    for (ComplexSparse::InnerIterator it(w, k); it; ++it) {
      const auto row = p.position[static_cast<std::size_t>(it.row())];
      if (static_cast<Eigen::Index>(row) < nr)
        t.emplace_back(static_cast<int>(row), static_cast<int>(p.position[static_cast<std::size_t>(it.col())]), it.value());
    }
  for (Eigen::Index k = 0; k < d.outerSize(); ++k)
    for (ComplexSparse::InnerIterator it(d, k); it; ++it)
      t.emplace_back(static_cast<int>(nr + it.row()), static_cast<int>(p.position[static_cast<std::size_t>(it.col())]), it.value());
  LinearSystem s;
  const auto n = w.rows();
  s.matrix.resize(n, n);
  s.matrix.setFromTriplets(t.begin(), t.end());
  s.matrix.makeCompressed();
  s.rhs = ComplexVector::Zero(n);
  const ComplexVector jr = reorder(rhs, p);
  s.rhs.head(nr) = jr.head(nr);
  return s;
}

}  // namespace twostep
