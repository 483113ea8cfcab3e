#pragma once

// Global matrix and source-vector assembly.
//
// All kernels integrate over every mesh entity ("full" matrices); restriction
// to free DOFs and the Dirichlet lift are applied afterwards. Frequency never
// enters here: the complex conductivity is formed per frequency in system.hpp.

#include <Eigen/SparseCore>
#include <functional>
#include <string>
#include <vector>

#include "twostep/mesh.hpp"
#include "twostep/quadrature.hpp"
#include "twostep/spaces.hpp"

namespace twostep {

struct Material {
  std::string name;
  double sigma = 0.0;  // S/m
  double eps = 0.0;    // F/m
  double nu = 0.0;     // m/H
};

enum class Weight { One, Sigma, Eps, Nu };

/// Piecewise-constant material data, looked up by cell.
class MaterialField {
 public:
  MaterialField() = default;
  MaterialField(std::vector<Material> table, const RegionTags& regions)
      : table_(std::move(table)), cell_material_(regions.cell_material) {
    for (std::size_t c = 0; c < cell_material_.size(); ++c) {
      const auto m = cell_material_[c];
      if (m < 0 || static_cast<std::size_t>(m) >= table_.size())
        throw InvalidArgument("MaterialField: cell " + std::to_string(c) + " has no material");
      const auto& mat = table_[static_cast<std::size_t>(m)];
      if (!(mat.eps > 0.0) || !(mat.nu > 0.0) || mat.sigma < 0.0)
        throw InvalidArgument("MaterialField: material '" + mat.name + "' needs eps > 0, nu > 0, sigma >= 0");
      if (regions.cell_region[c] == Region::Air && mat.sigma != 0.0)
        throw InvalidArgument("MaterialField: air cell " + std::to_string(c) + " has nonzero conductivity");
      if (regions.cell_region[c] == Region::Conductor && mat.sigma == 0.0)
        throw InvalidArgument("MaterialField: conductor cell " + std::to_string(c) + " has zero conductivity");
    }
  }

  const Material& at(std::size_t cell) const { return table_[static_cast<std::size_t>(cell_material_[cell])]; }

  double value(std::size_t cell, Weight w) const {
    switch (w) {
      case Weight::One: return 1.0;
      case Weight::Sigma: return at(cell).sigma;
      case Weight::Eps: return at(cell).eps;
      case Weight::Nu: return at(cell).nu;
    }
    return 0.0;
  }

  double max_sigma() const {
    double m = 0.0;
    for (auto i : cell_material_) m = std::max(m, table_[static_cast<std::size_t>(i)].sigma);
    return m;
  }
  double max_eps() const {
    double m = 0.0;
    for (auto i : cell_material_) m = std::max(m, table_[static_cast<std::size_t>(i)].eps);
    return m;
  }
  const std::vector<Material>& table() const { return table_; }

 private:
  std::vector<Material> table_;
  std::vector<int> cell_material_;
};

inline constexpr int kBilinearQuadOrder = 2;  // exact for trilinear/edge products on boxes

namespace detail {

inline RealSparse from_triplets(std::size_t rows, std::size_t cols, const std::vector<Eigen::Triplet<double>>& t) {
  RealSparse a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  a.setFromTriplets(t.begin(), t.end());
  a.prune(0.0);
  a.makeCompressed();
  return a;
}

template <class ElementKernel>
RealSparse assemble_cells(const Mesh& mesh, std::size_t rows, std::size_t cols, ElementKernel&& kernel) {
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) kernel(c, t);
  return from_triplets(rows, cols, t);
}

}  // namespace detail

/// Full node x node stiffness  int w grad v_j . grad v_i.
inline RealSparse assemble_grad_grad_full(const Mesh& mesh, const MaterialField& mat, Weight w) {
  const auto q = gauss_hex(kBilinearQuadOrder);
  const auto h = mesh.spacing();
  const double jac = h[0] * h[1] * h[2] / 8.0;
  return detail::assemble_cells(mesh, mesh.num_nodes(), mesh.num_nodes(), [&](std::size_t c, auto& t) {
    const double coef = mat.value(c, w);
    if (coef == 0.0) return;
    std::array<std::array<double, 8>, 8> ke{};
    for (const auto& p : q) {
      const auto b = eval_scalar_basis(mesh, c, p.xi);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) ke[i][j] += p.w * jac * coef * dot(b.grad[i], b.grad[j]);
    }
    const auto& cn = mesh.cells()[c];
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        t.emplace_back(static_cast<int>(cn[i]), static_cast<int>(cn[j]), ke[i][j]);
  });
}

/// Full edge x node coupling  int w grad v_j . w_i.
inline RealSparse assemble_grad_coupling_full(const Mesh& mesh, const MaterialField& mat, Weight w) {
  const auto q = gauss_hex(kBilinearQuadOrder);
  const auto h = mesh.spacing();
  const double jac = h[0] * h[1] * h[2] / 8.0;
  return detail::assemble_cells(mesh, mesh.num_edges(), mesh.num_nodes(), [&](std::size_t c, auto& t) {
    const double coef = mat.value(c, w);
    if (coef == 0.0) return;
    std::array<std::array<double, 8>, 12> ke{};
    for (const auto& p : q) {
      const auto s = eval_scalar_basis(mesh, c, p.xi);
      const auto e = eval_edge_basis(mesh, c, p.xi);
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 8; ++j) ke[i][j] += p.w * jac * coef * dot(s.grad[j], e.value[i]);
    }
    const auto& cn = mesh.cells()[c];
    const auto& ce = mesh.cell_edges()[c];
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 8; ++j) t.emplace_back(static_cast<int>(ce[i].id), static_cast<int>(cn[j]), ke[i][j]);
  });
}

namespace detail {

template <bool Curl>
RealSparse assemble_edge_edge_full(const Mesh& mesh, const MaterialField& mat, Weight w) {
  const auto q = gauss_hex(kBilinearQuadOrder);
  const auto h = mesh.spacing();
  const double jac = h[0] * h[1] * h[2] / 8.0;
  return assemble_cells(mesh, mesh.num_edges(), mesh.num_edges(), [&](std::size_t c, auto& t) {
    const double coef = mat.value(c, w);
    if (coef == 0.0) return;
    std::array<std::array<double, 12>, 12> ke{};
    for (const auto& p : q) {
      const auto e = eval_edge_basis(mesh, c, p.xi);
      const auto& f = Curl ? e.curl : e.value;
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) ke[i][j] += p.w * jac * coef * dot(f[i], f[j]);
    }
    const auto& ce = mesh.cell_edges()[c];
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) t.emplace_back(static_cast<int>(ce[i].id), static_cast<int>(ce[j].id), ke[i][j]);
  });
}

}  // namespace detail

/// Full edge mass  int w w_j . w_i.
inline RealSparse assemble_mass_full(const Mesh& mesh, const MaterialField& mat, Weight w) {
  return detail::assemble_edge_edge_full<false>(mesh, mat, w);
}

/// Full curl-curl  int nu curl w_j . curl w_i.
inline RealSparse assemble_curl_curl_full(const Mesh& mesh, const MaterialField& mat) {
  return detail::assemble_edge_edge_full<true>(mesh, mat, Weight::Nu);
}

// ---------------------------------------------------------------------------
// Restriction to free DOFs

/// Rows/columns of a full matrix selected by the free entities of two DOF maps.
inline RealSparse restrict_free(const RealSparse& full, const DofMap& rows, const DofMap& cols) {
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index k = 0; k < full.outerSize(); ++k)
    for (RealSparse::InnerIterator it(full, k); it; ++it) {
      const auto r = rows.dof(static_cast<std::size_t>(it.row()));
      const auto c = cols.dof(static_cast<std::size_t>(it.col()));
      if (r >= 0 && c >= 0) t.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
    }
  return detail::from_triplets(rows.num_free(), cols.num_free(), t);
}

/// Contribution of prescribed column values to free rows:  A[free, fixed] * g.
inline ComplexVector lift_vector(const RealSparse& full, const DofMap& rows, const ScalarSpace& cols) {
  ComplexVector out = ComplexVector::Zero(static_cast<Eigen::Index>(rows.num_free()));
  for (Eigen::Index k = 0; k < full.outerSize(); ++k)
    for (RealSparse::InnerIterator it(full, k); it; ++it) {
      const auto r = rows.dof(static_cast<std::size_t>(it.row()));
      const auto col = static_cast<std::size_t>(it.col());
      if (r >= 0 && !cols.dofs.is_free(col)) out[r] += it.value() * cols.prescribed[col];
    }
  return out;
}

inline RealSparse assemble_grad_grad(const ScalarSpace& s, const MaterialField& mat, Weight w) {
  return restrict_free(assemble_grad_grad_full(*s.mesh, mat, w), s.dofs, s.dofs);
}
inline RealSparse assemble_grad_coupling(const ScalarSpace& s, const EdgeSpace& e, const MaterialField& mat,
                                         Weight w) {
  return restrict_free(assemble_grad_coupling_full(*s.mesh, mat, w), e.dofs, s.dofs);
}
inline RealSparse assemble_mass(const EdgeSpace& e, const MaterialField& mat, Weight w) {
  return restrict_free(assemble_mass_full(*e.mesh, mat, w), e.dofs, e.dofs);
}
inline RealSparse assemble_curl_curl(const EdgeSpace& e, const MaterialField& mat) {
  return restrict_free(assemble_curl_curl_full(*e.mesh, mat), e.dofs, e.dofs);
}

/// Weak divergence  D_w = -(G_w)^T  with rows on the scalar test space.
inline RealSparse assemble_weak_divergence(const ScalarSpace& test, const EdgeSpace& e, const MaterialField& mat,
                                           Weight w) {
  RealSparse g = assemble_grad_coupling(test, e, mat, w);
  RealSparse d = -RealSparse(g.transpose());
  d.makeCompressed();
  return d;
}

// ---------------------------------------------------------------------------
// Sources

using CVec3 = std::array<cplx, 3>;
using ScalarSource = std::function<cplx(const Vec3&)>;
using VectorSource = std::function<CVec3(const Vec3&)>;

/// Source vectors are integrated with a higher-order rule than the bilinear
/// forms so that smooth manufactured sources stay discretely compatible.
inline constexpr int kSourceQuadOrder = 6;

/// Full node vector  int rho v_i.
inline ComplexVector assemble_charge_vector_full(const Mesh& mesh, const ScalarSource& rho,
                                                 int order = kSourceQuadOrder) {
  ComplexVector q = ComplexVector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
  if (!rho) return q;
  const auto qp = gauss_hex(order);
  const auto h = mesh.spacing();
  const double jac = h[0] * h[1] * h[2] / 8.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    std::array<cplx, 8> local{};
    for (const auto& p : qp) {
      const auto b = eval_scalar_basis(mesh, c, p.xi);
      const cplx r = rho(mesh.to_physical(c, p.xi));
      for (int i = 0; i < 8; ++i) local[i] += p.w * jac * r * b.value[i];
    }
    for (int i = 0; i < 8; ++i) q[static_cast<Eigen::Index>(mesh.cells()[c][i])] += local[i];
  }
  return q;
}

/// Full edge vector  int J . w_i.
inline ComplexVector assemble_current_vector_full(const Mesh& mesh, const VectorSource& current,
                                                  int order = kSourceQuadOrder) {
  ComplexVector j = ComplexVector::Zero(static_cast<Eigen::Index>(mesh.num_edges()));
  if (!current) return j;
  const auto qp = gauss_hex(order);
  const auto h = mesh.spacing();
  const double jac = h[0] * h[1] * h[2] / 8.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    std::array<cplx, 12> local{};
    for (const auto& p : qp) {
      const auto e = eval_edge_basis(mesh, c, p.xi);
      const CVec3 js = current(mesh.to_physical(c, p.xi));
      for (int i = 0; i < 12; ++i)
        local[i] += p.w * jac * (js[0] * e.value[i][0] + js[1] * e.value[i][1] + js[2] * e.value[i][2]);
    }
    for (int i = 0; i < 12; ++i) j[static_cast<Eigen::Index>(mesh.cell_edges()[c][i].id)] += local[i];
  }
  return j;
}

inline ComplexVector restrict_free(const ComplexVector& full, const DofMap& dofs) {
  ComplexVector out(static_cast<Eigen::Index>(dofs.num_free()));
  for (std::size_t i = 0; i < dofs.num_free(); ++i)
    out[static_cast<Eigen::Index>(i)] = full[static_cast<Eigen::Index>(dofs.free_entities()[i])];
  return out;
}

inline ComplexVector assemble_charge_vector(const ScalarSpace& s, const ScalarSource& rho) {
  return restrict_free(assemble_charge_vector_full(*s.mesh, rho), s.dofs);
}
inline ComplexVector assemble_current_vector(const EdgeSpace& e, const VectorSource& current) {
  return restrict_free(assemble_current_vector_full(*e.mesh, current), e.dofs);
}

// ---------------------------------------------------------------------------

/// Frequency-independent matrices and source vectors of one scenario.
///
/// Scalar rows/columns live on the potential space (free phi DOFs); the
/// divergence rows live on the gauge test space (nodes whose hat-function
/// gradients lie in the free edge space, minus the tree root).
struct MatrixBundle {
  RealSparse K_sigma, K_eps;          // n_v x n_v
  ComplexVector k_sigma_lift, k_eps_lift;
  RealSparse G_sigma, G_eps;          // n_w x n_v
  ComplexVector g_sigma_lift, g_eps_lift;
  RealSparse M_sigma, M_eps;          // n_w x n_w
  RealSparse C_nu;                    // n_w x n_w
  RealSparse D_sigma, D_eps;          // n_gauge x n_w
  RealSparse P;                       // n_w x n_gauge, gradient incidence onto the gauge nodes
  ComplexVector q_s;                  // n_v
  ComplexVector j_s;                  // n_w
  std::vector<bool> scalar_conductor; // per free phi DOF
  std::vector<bool> gauge_conductor;  // per gauge row

  std::size_t n_v() const { return static_cast<std::size_t>(K_eps.rows()); }
  std::size_t n_w() const { return static_cast<std::size_t>(C_nu.rows()); }
  std::size_t n_gauge() const { return static_cast<std::size_t>(D_eps.rows()); }
};

inline MatrixBundle assemble_bundle(const ScalarSpace& scalar, const EdgeSpace& edge, const ScalarSpace& gauge,
                                    const MaterialField& mat, const RegionTags& regions, const ScalarSource& rho,
                                    const VectorSource& current) {
  const Mesh& mesh = *scalar.mesh;
  MatrixBundle b;
  const auto kf_sigma = assemble_grad_grad_full(mesh, mat, Weight::Sigma);
  const auto kf_eps = assemble_grad_grad_full(mesh, mat, Weight::Eps);
  b.K_sigma = restrict_free(kf_sigma, scalar.dofs, scalar.dofs);
  b.K_eps = restrict_free(kf_eps, scalar.dofs, scalar.dofs);
  b.k_sigma_lift = lift_vector(kf_sigma, scalar.dofs, scalar);
  b.k_eps_lift = lift_vector(kf_eps, scalar.dofs, scalar);

  const auto gf_sigma = assemble_grad_coupling_full(mesh, mat, Weight::Sigma);
  const auto gf_eps = assemble_grad_coupling_full(mesh, mat, Weight::Eps);
  b.G_sigma = restrict_free(gf_sigma, edge.dofs, scalar.dofs);
  b.G_eps = restrict_free(gf_eps, edge.dofs, scalar.dofs);
  b.g_sigma_lift = lift_vector(gf_sigma, edge.dofs, scalar);
  b.g_eps_lift = lift_vector(gf_eps, edge.dofs, scalar);

  b.M_sigma = restrict_free(assemble_mass_full(mesh, mat, Weight::Sigma), edge.dofs, edge.dofs);
  b.M_eps = restrict_free(assemble_mass_full(mesh, mat, Weight::Eps), edge.dofs, edge.dofs);
  b.C_nu = restrict_free(assemble_curl_curl_full(mesh, mat), edge.dofs, edge.dofs);

  b.D_sigma = -RealSparse(restrict_free(gf_sigma, edge.dofs, gauge.dofs).transpose());
  b.D_eps = -RealSparse(restrict_free(gf_eps, edge.dofs, gauge.dofs).transpose());
  b.D_sigma.makeCompressed();
  b.D_eps.makeCompressed();
  b.P = gradient_incidence(edge, gauge);

  b.q_s = restrict_free(assemble_charge_vector_full(mesh, rho), scalar.dofs);
  b.j_s = restrict_free(assemble_current_vector_full(mesh, current), edge.dofs);

  for (auto n : scalar.dofs.free_entities()) b.scalar_conductor.push_back(regions.node_conductor[n]);
  for (auto n : gauge.dofs.free_entities()) b.gauge_conductor.push_back(regions.node_conductor[n]);
  return b;
}

}  // namespace twostep
