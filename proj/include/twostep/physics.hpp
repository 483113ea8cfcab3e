#pragma once

// Two-step solve orchestration, derived fields and diagnostics.

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twostep/assembly.hpp"
#include "twostep/gauge.hpp"
#include "twostep/solve.hpp"
#include "twostep/system.hpp"

namespace twostep {

inline constexpr double kEps0 = 8.8541878128e-12;           // F/m
inline constexpr double kMu0 = 4e-7 * std::numbers::pi;     // H/m

// ---------------------------------------------------------------------------
// Manufactured solution on (pi/2, 3pi/2)^3:
//   A   = ( sin x cos y cos z, -2 cos x sin y cos z, cos x cos y sin z )
//   phi = cos x cos y cos z

class ManufacturedCase {
 public:
  explicit ManufacturedCase(double sigma, double eps = kEps0, double nu = 1.0 / kMu0)
      : sigma_(sigma), eps_(eps), nu_(nu) {}

  static std::array<Interval, 3> domain() {
    constexpr double pi = std::numbers::pi;
    return {Interval{pi / 2, 3 * pi / 2}, Interval{pi / 2, 3 * pi / 2}, Interval{pi / 2, 3 * pi / 2}};
  }

  double sigma() const { return sigma_; }
  double eps() const { return eps_; }
  double nu() const { return nu_; }
  cplx kappa(double omega) const { return {sigma_, omega * eps_}; }

  static Vec3 A(const Vec3& p) {
    const auto [sx, cx, sy, cy, sz, cz] = trig(p);
    return {sx * cy * cz, -2.0 * cx * sy * cz, cx * cy * sz};
  }
  static Vec3 curl_A(const Vec3& p) {
    const auto [sx, cx, sy, cy, sz, cz] = trig(p);
    // (dAz/dy - dAy/dz, dAx/dz - dAz/dx, dAy/dx - dAx/dy)
    return {-cx * sy * sz - 2.0 * cx * sy * sz, -sx * cy * sz + sx * cy * sz, 2.0 * sx * sy * cz + sx * sy * cz};
  }
  static Vec3 curl_curl_A(const Vec3& p) {
    const auto [sx, cx, sy, cy, sz, cz] = trig(p);
    // B = (-3 cx sy sz, 0, 3 sx sy cz)
    return {3.0 * sx * cy * cz, -3.0 * cx * sy * cz - 3.0 * cx * sy * cz, 3.0 * cx * cy * sz};
  }
  static double div_A(const Vec3& p) {
    const auto [sx, cx, sy, cy, sz, cz] = trig(p);
    return cx * cy * cz - 2.0 * cx * cy * cz + cx * cy * cz;
  }
  static double phi(const Vec3& p) {
    const auto [sx, cx, sy, cy, sz, cz] = trig(p);
    return cx * cy * cz;
  }
  static Vec3 grad_phi(const Vec3& p) {
    const auto [sx, cx, sy, cy, sz, cz] = trig(p);
    return {-sx * cy * cz, -cx * sy * cz, -cx * cy * sz};
  }
  static double laplace_phi(const Vec3& p) { return -3.0 * phi(p); }

  /// J_s = curl(nu curl A) + i omega kappa A + kappa grad phi.
  CVec3 current(const Vec3& p, double omega) const {
    const auto cc = curl_curl_A(p);
    const auto a = A(p);
    const auto g = grad_phi(p);
    const cplx k = kappa(omega);
    const cplx iwk = cplx(0.0, omega) * k;
    return {nu_ * cc[0] + iwk * a[0] + k * g[0], nu_ * cc[1] + iwk * a[1] + k * g[1], nu_ * cc[2] + iwk * a[2] + k * g[2]};
  }
  /// rho_s = -div(kappa grad phi) / (i omega). At omega = 0 only the
  /// sigma = 0 case has a limit (-eps laplace phi).
  cplx charge(const Vec3& p, double omega) const {
    if (omega == 0.0) {
      if (sigma_ != 0.0) throw InvalidArgument("manufactured charge density is undefined at omega = 0 for sigma > 0");
      return -eps_ * laplace_phi(p);
    }
    return -kappa(omega) * laplace_phi(p) / cplx(0.0, omega);
  }
  bool defined_at(double omega) const { return omega > 0.0 || sigma_ == 0.0; }
  /// Source displacement field with div D_s = -rho_s:  kappa grad phi / (i omega).
  CVec3 source_displacement(const Vec3& p, double omega) const {
    const auto g = grad_phi(p);
    if (omega == 0.0) {
      if (sigma_ != 0.0) throw InvalidArgument("manufactured source displacement is undefined at omega = 0 for sigma > 0");
      return {cplx(eps_ * g[0]), cplx(eps_ * g[1]), cplx(eps_ * g[2])};
    }
    const cplx s = kappa(omega) / cplx(0.0, omega);
    return {s * g[0], s * g[1], s * g[2]};
  }

 private:
  static std::array<double, 6> trig(const Vec3& p) {
    return {std::sin(p[0]), std::cos(p[0]), std::sin(p[1]), std::cos(p[1]), std::sin(p[2]), std::cos(p[2])};
  }

  double sigma_, eps_, nu_;
};

// ---------------------------------------------------------------------------

enum class SourceKind { None, Manufactured };

/// Everything needed to build a problem on a box.
struct ProblemSpec {
  std::array<Interval, 3> extents{};
  std::array<int, 3> subdivisions{1, 1, 1};
  std::vector<Material> materials;
  std::vector<RegionPredicate> regions;
  DirichletSpec dirichlet;
  SourceKind source = SourceKind::None;
};

/// A built scenario: mesh, spaces, gauge partition and frequency-independent
/// matrices. Immutable after construction.
struct Problem {
  ProblemSpec spec;
  std::shared_ptr<const Mesh> mesh;
  RegionTags regions;
  BoundaryTags boundary;
  MaterialField materials;
  ScalarSpace scalar;
  EdgeSpace edge;
  GaugeGraph graph;
  TreeCotreePartition partition;
  ScalarSpace gauge;
  MatrixBundle bundle;
  std::optional<ManufacturedCase> manufactured;
};

inline Problem build_problem(const ProblemSpec& spec) {
  Problem p;
  p.spec = spec;
  p.mesh = std::make_shared<const Mesh>(build_box_mesh(spec.extents, spec.subdivisions));
  p.regions = tag_regions(*p.mesh, spec.regions);
  p.boundary = boundary_entities(*p.mesh);
  p.materials = MaterialField(spec.materials, p.regions);
  p.scalar = build_scalar_space(p.mesh, p.boundary, spec.dirichlet);
  p.edge = build_edge_space(p.mesh, p.boundary, spec.dirichlet);
  p.graph = build_gauge_graph(p.edge, p.boundary, spec.dirichlet);
  p.partition = spanning_tree(p.graph);
  p.gauge = scalar_space_on(p.mesh, p.partition.gauge_nodes);
  if (spec.source == SourceKind::Manufactured) {
    const auto& m0 = p.materials.at(0);
    for (std::size_t c = 0; c < p.mesh->num_cells(); ++c) {
      const auto& m = p.materials.at(c);
      if (m.sigma != m0.sigma || m.eps != m0.eps || m.nu != m0.nu)
        throw InvalidArgument("manufactured source needs homogeneous material");
    }
    p.manufactured.emplace(m0.sigma, m0.eps, m0.nu);
  }
  p.bundle = assemble_bundle(p.scalar, p.edge, p.gauge, p.materials, p.regions, {}, {});
  return p;
}

/// Source vectors (q_s, j_s) of a problem at one frequency.
inline std::pair<ComplexVector, ComplexVector> source_vectors(const Problem& p, double omega) {
  if (!p.manufactured) return {p.bundle.q_s, p.bundle.j_s};
  const auto& mc = *p.manufactured;
  ScalarSource rho = [&](const Vec3& x) { return mc.charge(x, omega); };
  VectorSource js = [&](const Vec3& x) { return mc.current(x, omega); };
  return {assemble_charge_vector(p.scalar, rho), assemble_current_vector(p.edge, js)};
}

/// Every conductor component must touch a scalar Dirichlet node for the
/// static current-flow block to be regular.
inline void check_grounded_conductors(const Problem& p) {
  const Mesh& mesh = *p.mesh;
  std::vector<int> comp(mesh.num_cells(), -1);
  std::vector<std::vector<std::size_t>> node_cells(mesh.num_nodes());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (auto n : mesh.cells()[c]) node_cells[n].push_back(c);
  int next = 0;
  for (std::size_t seed = 0; seed < mesh.num_cells(); ++seed) {
    if (!p.regions.is_conductor_cell(seed) || comp[seed] >= 0) continue;
    bool grounded = false;
    std::vector<std::size_t> stack{seed};
    comp[seed] = next;
    while (!stack.empty()) {
      const auto c = stack.back();
      stack.pop_back();
      for (auto n : mesh.cells()[c]) {
        if (!p.scalar.dofs.is_free(n)) grounded = true;
        for (auto d : node_cells[n])
          if (p.regions.is_conductor_cell(d) && comp[d] < 0) {
            comp[d] = next;
            stack.push_back(d);
          }
      }
    }
    if (!grounded)
      throw StaticSingularity(next, "static limit: conductor component " + std::to_string(next) +
                                        " touches no scalar Dirichlet surface");
    ++next;
  }
}

// ---------------------------------------------------------------------------

enum class Method { Original, TreeCotree, Lagrange };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Original: return "original";
    case Method::TreeCotree: return "tree-cotree";
    case Method::Lagrange: return "lagrange";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (auto m : {Method::Original, Method::TreeCotree, Method::Lagrange})
    if (to_string(m) == s) return m;
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

struct Solution {
  FrequencyPoint frequency;
  Method method = Method::TreeCotree;
  ComplexVector u;                     // free scalar DOFs
  ComplexVector a;                     // free edge DOFs
  std::optional<ComplexVector> lambda; // Lagrange multipliers
  ComplexVector j;                     // right-hand side j(u) of the curl step
  double eqs_residual = 0.0;
  double curl_residual = 0.0;          // relative residual of the solved curl-step system
  std::size_t curl_dofs = 0;           // dimension of the solved curl-step system
};

struct SolveOptions {
  std::optional<ScalingFactors> scaling;  // defaults to scaling_factors(omega, materials)
};

/// Step 1 only: the scalar potential.
inline SolveReport solve_eqs(const Problem& p, double omega, const ComplexVector& q_s) {
  if (omega == 0.0) {
    check_grounded_conductors(p);
    auto s = build_eqs_static_limit(p.bundle);
    if (p.bundle.n_v() == 0) return SolveReport{ComplexVector(0), 0.0, 1.0, 0.0};
    return sparse_lu_solve(s.matrix, s.rhs);
  }
  MatrixBundle b = p.bundle;
  b.q_s = q_s;
  auto s = build_eqs_system(b, omega);
  if (p.bundle.n_v() == 0) return SolveReport{ComplexVector(0), 0.0, 1.0, 0.0};
  return sparse_lu_solve(s.matrix, s.rhs);
}

/// The curl-step matrix and right-hand side for a given method, before solving.
inline LinearSystem curl_step_system(const Problem& p, double omega, Method method, const ComplexVector& j,
                                     const SolveOptions& opt = {}) {
  const auto w = build_curl_matrix(p.bundle, omega);
  if (method == Method::Original) return {w, j};
  const auto s = opt.scaling.value_or(scaling_factors(omega, p.materials));
  const auto d = build_scaled_divergence(p.bundle, omega, s);
  if (method == Method::Lagrange) return build_lagrange_system(w, d, j);
  return build_stabilized_system(w, d, j, p.partition);
}

/// Two-step solve: EQS (or its static limit at f = 0), then the curl step
/// with right-hand side j(u) using the selected variant.
inline Solution run_two_step(const Problem& p, FrequencyPoint f, Method method, const SolveOptions& opt = {}) {
  const double omega = f.omega();
  if (p.manufactured && !p.manufactured->defined_at(omega))
    throw InvalidArgument("manufactured sources with sigma > 0 are not defined at f = 0");
  auto [q_s, j_s] = source_vectors(p, omega);

  Solution sol;
  sol.frequency = f;
  sol.method = method;
  const auto eqs = solve_eqs(p, omega, q_s);
  sol.u = eqs.x;
  sol.eqs_residual = eqs.relative_residual;

  MatrixBundle b_src = p.bundle;  // only the source vector differs
  b_src.j_s = j_s;
  sol.j = build_rhs(b_src, omega, sol.u);

  const auto sys = curl_step_system(p, omega, method, sol.j, opt);
  sol.curl_dofs = static_cast<std::size_t>(sys.matrix.rows());
  const auto rep = sparse_lu_solve(sys.matrix, sys.rhs);
  sol.curl_residual = rep.relative_residual;
  const auto nw = static_cast<Eigen::Index>(p.bundle.n_w());
  switch (method) {
    case Method::Original: sol.a = rep.x; break;
    case Method::TreeCotree: sol.a = unorder(rep.x, p.partition); break;
    case Method::Lagrange:
      sol.a = rep.x.head(nw);
      sol.lambda = rep.x.tail(rep.x.size() - nw);
      break;
  }
  return sol;
}

/// delta_D = || (D_sigma + i omega D_eps) a ||_2, always unscaled.
inline double gauge_residual(const MatrixBundle& b, double omega, const ComplexVector& a) {
  return (kappa_divergence(b, omega) * a).norm();
}

// ---------------------------------------------------------------------------
// Fields

/// Prescribed + free scalar values on all nodes.
inline ComplexVector full_scalar(const ScalarSpace& s, const ComplexVector& u) {
  ComplexVector out(static_cast<Eigen::Index>(s.dofs.num_entities()));
  for (std::size_t n = 0; n < s.dofs.num_entities(); ++n) {
    const auto d = s.dofs.dof(n);
    out[static_cast<Eigen::Index>(n)] = d >= 0 ? u[d] : s.prescribed[n];
  }
  return out;
}

inline ComplexVector full_edge(const EdgeSpace& e, const ComplexVector& a) {
  ComplexVector out = ComplexVector::Zero(static_cast<Eigen::Index>(e.dofs.num_entities()));
  for (std::size_t k = 0; k < e.dofs.num_free(); ++k)
    out[static_cast<Eigen::Index>(e.dofs.free_entities()[k])] = a[static_cast<Eigen::Index>(k)];
  return out;
}

/// Edge moments (tangential line integrals) of a vector field, on the free
/// edges; 5-point Gauss along each edge.
template <class Field>
ComplexVector edge_interpolant(const EdgeSpace& e, Field&& field) {
  const Mesh& mesh = *e.mesh;
  const auto g = gauss_legendre(5);
  ComplexVector out(static_cast<Eigen::Index>(e.n_w()));
  for (std::size_t k = 0; k < e.n_w(); ++k) {
    const auto edge = e.dofs.free_entities()[k];
    const auto& a = mesh.node(mesh.edges()[edge][0]);
    const auto& b = mesh.node(mesh.edges()[edge][1]);
    const Vec3 t = b - a;
    cplx s = 0.0;
    for (const auto& q : g) {
      const Vec3 x = a + (0.5 * (q.x + 1.0)) * t;
      const auto v = field(x);
      s += 0.5 * q.w * (cplx(v[0]) * t[0] + cplx(v[1]) * t[1] + cplx(v[2]) * t[2]);
    }
    out[static_cast<Eigen::Index>(k)] = s;
  }
  return out;
}

struct FieldSample {
  cplx phi;
  CVec3 grad_phi, A, B, E;
  CVec3 D, D_e, D_m, D_s;
  CVec3 J, J_e, J_m, J_s;
};

/// Pointwise evaluation of the discrete potentials and derived fields.
class DerivedFields {
 public:
  DerivedFields(const Problem& p, const Solution& s)
      : problem_(&p), omega_(s.frequency.omega()), u_(full_scalar(p.scalar, s.u)), a_(full_edge(p.edge, s.a)) {}

  FieldSample sample(const Vec3& x) const {
    const Mesh& mesh = *problem_->mesh;
    const auto cell_idx = mesh.locate(x);
    if (cell_idx < 0) throw InvalidArgument("DerivedFields: point outside the domain");
    const auto cell = static_cast<std::size_t>(cell_idx);
    const auto xi = mesh.to_reference(cell, x);
    const auto sb = eval_scalar_basis(mesh, cell, xi);
    const auto eb = eval_edge_basis(mesh, cell, xi);
    FieldSample f{};
    for (int i = 0; i < 8; ++i) {
      const cplx ui = u_[static_cast<Eigen::Index>(mesh.cells()[cell][i])];
      f.phi += ui * sb.value[i];
      for (int d = 0; d < 3; ++d) f.grad_phi[d] += ui * sb.grad[i][d];
    }
    for (int i = 0; i < 12; ++i) {
      const cplx ai = a_[static_cast<Eigen::Index>(mesh.cell_edges()[cell][i].id)];
      for (int d = 0; d < 3; ++d) {
        f.A[d] += ai * eb.value[i][d];
        f.B[d] += ai * eb.curl[i][d];
      }
    }
    const auto& m = problem_->materials.at(cell);
    const cplx iw(0.0, omega_);
    if (problem_->manufactured) {
      f.J_s = problem_->manufactured->current(x, omega_);
      f.D_s = problem_->manufactured->source_displacement(x, omega_);
    }
    for (int d = 0; d < 3; ++d) {
      f.E[d] = -f.grad_phi[d] - iw * f.A[d];
      f.D_e[d] = -m.eps * f.grad_phi[d];
      f.D_m[d] = -iw * m.eps * f.A[d];
      f.J_e[d] = -m.sigma * f.grad_phi[d];
      f.J_m[d] = -iw * m.sigma * f.A[d];
      f.D[d] = f.D_e[d] + f.D_m[d] + f.D_s[d];
      f.J[d] = f.J_e[d] + f.J_m[d] + f.J_s[d];
    }
    return f;
  }

 private:
  const Problem* problem_;
  double omega_;
  ComplexVector u_;
  ComplexVector a_;
};

/// || a_h - A ||_{H(curl)} with 3^3 Gauss points per cell.
inline double hcurl_error(const Problem& p, const ComplexVector& a, const ManufacturedCase& ref) {
  const Mesh& mesh = *p.mesh;
  const auto full = full_edge(p.edge, a);
  const auto q = gauss_hex(3);
  const auto h = mesh.spacing();
  const double jac = h[0] * h[1] * h[2] / 8.0;
  double err2 = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& ce = mesh.cell_edges()[c];
    for (const auto& qp : q) {
      const auto eb = eval_edge_basis(mesh, c, qp.xi);
      const auto x = mesh.to_physical(c, qp.xi);
      const auto A = ref.A(x);
      const auto B = ref.curl_A(x);
      CVec3 ah{}, bh{};
      for (int i = 0; i < 12; ++i) {
        const cplx ai = full[static_cast<Eigen::Index>(ce[i].id)];
        for (int d = 0; d < 3; ++d) {
          ah[d] += ai * eb.value[i][d];
          bh[d] += ai * eb.curl[i][d];
        }
      }
      double s = 0.0;
      for (int d = 0; d < 3; ++d) s += std::norm(ah[d] - A[d]) + std::norm(bh[d] - B[d]);
      err2 += qp.w * jac * s;
    }
  }
  return std::sqrt(err2);
}

}  // namespace twostep
