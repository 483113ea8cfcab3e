#pragma once

// Lowest-order nodal (H1) and edge (H(curl)) spaces on box meshes.

#include <Eigen/SparseCore>
#include <algorithm>
#include <array>
#include <complex>
#include <memory>
#include <vector>

#include "twostep/mesh.hpp"

namespace twostep {

using cplx = std::complex<double>;
using RealSparse = Eigen::SparseMatrix<double>;
using ComplexSparse = Eigen::SparseMatrix<cplx>;
using ComplexVector = Eigen::VectorXcd;

struct ScalarDirichlet {
  BoundaryLabel label;
  cplx value{0.0, 0.0};
};

struct DirichletSpec {
  std::vector<ScalarDirichlet> scalar;
  std::vector<BoundaryLabel> edge;  // tangential trace forced to zero

  static DirichletSpec none() { return {}; }
};

/// Free/constrained split of a set of mesh entities. Free DOFs are numbered by
/// ascending entity id.
class DofMap {
 public:
  DofMap() = default;
  explicit DofMap(std::vector<bool> constrained) : constrained_(std::move(constrained)) {
    dof_.assign(constrained_.size(), -1);
    for (std::size_t e = 0; e < constrained_.size(); ++e)
      if (!constrained_[e]) {
        dof_[e] = static_cast<std::ptrdiff_t>(free_.size());
        free_.push_back(e);
      } else {
        fixed_.push_back(e);
      }
  }

  std::size_t num_entities() const { return constrained_.size(); }
  std::size_t num_free() const { return free_.size(); }
  std::size_t num_constrained() const { return fixed_.size(); }
  bool is_free(std::size_t entity) const { return !constrained_[entity]; }
  /// DOF index of an entity, or -1 if constrained.
  std::ptrdiff_t dof(std::size_t entity) const { return dof_[entity]; }
  const std::vector<std::size_t>& free_entities() const { return free_; }
  const std::vector<std::size_t>& constrained_entities() const { return fixed_; }

 private:
  std::vector<bool> constrained_;
  std::vector<std::ptrdiff_t> dof_;
  std::vector<std::size_t> free_;
  std::vector<std::size_t> fixed_;
};

/// One DOF per node; constrained nodes carry a prescribed value.
struct ScalarSpace {
  std::shared_ptr<const Mesh> mesh;
  DofMap dofs;
  std::vector<cplx> prescribed;  // per node; zero on free nodes

  std::size_t n_v() const { return dofs.num_free(); }
};

/// One DOF per edge (the tangential circulation); constrained edges are zero.
struct EdgeSpace {
  std::shared_ptr<const Mesh> mesh;
  DofMap dofs;

  std::size_t n_w() const { return dofs.num_free(); }
};

inline ScalarSpace build_scalar_space(std::shared_ptr<const Mesh> mesh, const BoundaryTags& tags,
                                      const DirichletSpec& spec) {
  std::vector<bool> constrained(mesh->num_nodes(), false);
  std::vector<cplx> value(mesh->num_nodes(), cplx{});
  for (const auto& d : spec.scalar) {
    if (static_cast<unsigned>(d.label) >= kAllBoundaryLabels.size())
      throw UnknownLabel("build_scalar_space: unknown boundary label");
    for (auto n : tags.nodes_of(d.label)) {
      constrained[n] = true;
      value[n] = d.value;  // later entries win on shared nodes
    }
  }
  return ScalarSpace{std::move(mesh), DofMap(std::move(constrained)), std::move(value)};
}

/// Scalar space whose free DOFs are exactly the listed nodes (homogeneous elsewhere).
inline ScalarSpace scalar_space_on(std::shared_ptr<const Mesh> mesh, const std::vector<std::size_t>& free_nodes) {
  std::vector<bool> constrained(mesh->num_nodes(), true);
  for (auto n : free_nodes) constrained[n] = false;
  const auto nn = mesh->num_nodes();
  return ScalarSpace{std::move(mesh), DofMap(std::move(constrained)), std::vector<cplx>(nn, cplx{})};
}

inline EdgeSpace build_edge_space(std::shared_ptr<const Mesh> mesh, const BoundaryTags& tags,
                                  const DirichletSpec& spec) {
  std::vector<bool> constrained(mesh->num_edges(), false);
  for (auto l : spec.edge) {
    if (static_cast<unsigned>(l) >= kAllBoundaryLabels.size())
      throw UnknownLabel("build_edge_space: unknown boundary label");
    for (auto e : tags.edges_of(l)) constrained[e] = true;
  }
  return EdgeSpace{std::move(mesh), DofMap(std::move(constrained))};
}

// ---------------------------------------------------------------------------
// Basis functions on the reference cell [-1,1]^3, mapped to an axis-aligned box.

struct ScalarBasisValues {
  std::array<double, 8> value{};
  std::array<Vec3, 8> grad{};  // physical
};

struct EdgeBasisValues {
  std::array<Vec3, 12> value{};  // physical, with local orientation sign applied
  std::array<Vec3, 12> curl{};
};

inline ScalarBasisValues eval_scalar_basis(const Mesh& mesh, std::size_t /*cell*/, const Vec3& xi) {
  const auto h = mesh.spacing();
  ScalarBasisValues out;
  for (int a = 0; a < 8; ++a) {
    std::array<double, 3> f{}, df{};
    for (int d = 0; d < 3; ++d) {
      const double s = kHexCorner[a][d] == 1 ? 1.0 : -1.0;
      f[d] = 0.5 * (1.0 + s * xi[d]);
      df[d] = 0.5 * s * 2.0 / h[d];
    }
    out.value[a] = f[0] * f[1] * f[2];
    out.grad[a] = {df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]};
  }
  return out;
}

/// Lowest-order hexahedral edge functions. For an edge along axis a at
/// transverse reference positions (s_b, s_c) = ±1:
///   w = (1/h_a) * (1 + s_b xi_b)(1 + s_c xi_c)/4 * e_a
/// so the tangential line integral along its own edge is 1.
inline EdgeBasisValues eval_edge_basis(const Mesh& mesh, std::size_t cell, const Vec3& xi) {
  const auto h = mesh.spacing();
  const auto& ce = mesh.cell_edges()[cell];
  EdgeBasisValues out;
  for (int e = 0; e < 12; ++e) {
    const int a = hex_edge_axis(e);
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    const auto& corner = kHexCorner[kHexEdgeNodes[e][0]];
    const double sb = corner[b] == 1 ? 1.0 : -1.0;
    const double sc = corner[c] == 1 ? 1.0 : -1.0;
    const double fb = 1.0 + sb * xi[b];
    const double fc = 1.0 + sc * xi[c];
    const double sign = ce[e].sign;
    const double amp = sign / (4.0 * h[a]);
    Vec3 w{};
    w[a] = amp * fb * fc;
    // d/dx_b = (2/h_b) d/dxi_b
    const double dwa_db = amp * sb * fc * 2.0 / h[b];
    const double dwa_dc = amp * fb * sc * 2.0 / h[c];
    // curl(w_a e_a) = (d_c w_a) e_b - (d_b w_a) e_c  for cyclic (a, b, c)
    Vec3 cu{};
    cu[b] = dwa_dc;
    cu[c] = -dwa_db;
    out.value[e] = w;
    out.curl[e] = cu;
  }
  return out;
}

/// Signed node-edge incidence restricted to free DOFs: column j (free node)
/// holds +1 on edges ending at the node and -1 on edges starting there. The
/// edge coefficients of grad v_j are exactly this column.
inline RealSparse gradient_incidence(const EdgeSpace& edges, const ScalarSpace& nodes) {
  const auto& mesh = *edges.mesh;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * edges.n_w());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto row = edges.dofs.dof(e);
    if (row < 0) continue;
    const auto& en = mesh.edges()[e];
    const auto ca = nodes.dofs.dof(en[0]);
    const auto cb = nodes.dofs.dof(en[1]);
    if (ca >= 0) t.emplace_back(static_cast<int>(row), static_cast<int>(ca), -1.0);
    if (cb >= 0) t.emplace_back(static_cast<int>(row), static_cast<int>(cb), 1.0);
  }
  RealSparse p(static_cast<Eigen::Index>(edges.n_w()), static_cast<Eigen::Index>(nodes.n_v()));
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

}  // namespace twostep
