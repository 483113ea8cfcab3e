#include "helpers.hpp"

#include <numbers>
#include <set>

using namespace twostep;
using namespace twostep::testing;

namespace {

// Every pair of grid nodes at unit lattice distance, found without using the
// mesh's own edge list.
std::size_t brute_force_edge_count(const Mesh& m) {
  std::size_t count = 0;
  for (std::size_t a = 0; a < m.num_nodes(); ++a)
    for (std::size_t b = a + 1; b < m.num_nodes(); ++b) {
      const auto ga = m.grid_index(a), gb = m.grid_index(b);
      int dist = 0;
      for (int d = 0; d < 3; ++d) dist += std::abs(ga[d] - gb[d]);
      if (dist == 1) ++count;
    }
  return count;
}

std::array<Interval, 3> pi_box() { return ManufacturedCase::domain(); }

}  // namespace

// ---------------------------------------------------------------------------
// mesh

TEST_CASE("single cell box has hexahedron counts", "[mesh]") {
  const auto m = build_box_mesh(unit_box(), {1, 1, 1});
  CHECK(m.num_nodes() == 8);
  CHECK(m.num_edges() == 12);
  CHECK(m.num_cells() == 1);
  CHECK(m.num_faces() == 6);
}

TEST_CASE("two-by-two-by-two box counts match the formula and brute force", "[mesh]") {
  const auto m = build_box_mesh(unit_box(), {2, 2, 2});
  CHECK(m.num_nodes() == 27);
  CHECK(m.num_edges() == 54);
  CHECK(m.num_cells() == 8);
  CHECK(brute_force_edge_count(m) == 54);
}

TEST_CASE("pi box with four subdivisions", "[mesh]") {
  const auto m = build_box_mesh(pi_box(), {4, 4, 4});
  CHECK(m.num_nodes() == 125);
  CHECK(m.num_edges() == 300);
  CHECK(m.num_cells() == 64);
  CHECK(m.node(0)[0] == std::numbers::pi / 2);
  CHECK(m.node(m.num_nodes() - 1)[2] == 3 * std::numbers::pi / 2);
}

TEST_CASE("invalid mesh arguments are rejected", "[mesh]") {
  CHECK_THROWS_AS(build_box_mesh(unit_box(), {0, 1, 1}), InvalidArgument);
  CHECK_THROWS_AS(build_box_mesh(unit_box(), {1, -2, 1}), InvalidArgument);
  CHECK_THROWS_AS(build_box_mesh({Interval{0, 1}, Interval{1, 1}, Interval{0, 1}}, {1, 1, 1}), InvalidArgument);
}

TEST_CASE("edge count formula and topology hold for all small grids", "[mesh][property]") {
  for (int a = 1; a <= 4; ++a)
    for (int b = 1; b <= 4; ++b)
      for (int c = 1; c <= 4; ++c) {
        const auto m = build_box_mesh(unit_box(), {a, b, c});
        const std::size_t formula = std::size_t(a) * (b + 1) * (c + 1) + std::size_t(b) * (a + 1) * (c + 1) +
                                    std::size_t(c) * (a + 1) * (b + 1);
        INFO(a << "x" << b << "x" << c);
        REQUIRE(m.num_edges() == formula);
        REQUIRE(brute_force_edge_count(m) == formula);
        REQUIRE(m.num_nodes() == std::size_t(a + 1) * (b + 1) * (c + 1));
        REQUIRE(m.num_cells() == std::size_t(a) * b * c);
        const auto euler = static_cast<long>(m.num_nodes()) - static_cast<long>(m.num_edges()) +
                           static_cast<long>(m.num_faces()) - static_cast<long>(m.num_cells());
        REQUIRE(euler == 1);
      }
}

TEST_CASE("edges are unique and stored low node first", "[mesh]") {
  const auto m = build_box_mesh(unit_box(), {3, 2, 4});
  std::set<std::array<std::size_t, 2>> seen;
  for (const auto& e : m.edges()) {
    CHECK(e[0] < e[1]);
    CHECK(seen.insert(e).second);
  }
}

TEST_CASE("interior faces have two cells and boundary faces one", "[mesh]") {
  const auto m = build_box_mesh(unit_box(), {3, 3, 2});
  std::size_t boundary = 0;
  std::vector<int> per_cell(m.num_cells(), 0);
  for (const auto& f : m.faces()) {
    REQUIRE(f.cells[0] >= 0);
    ++per_cell[static_cast<std::size_t>(f.cells[0])];
    if (f.cells[1] < 0) ++boundary;
    else ++per_cell[static_cast<std::size_t>(f.cells[1])];
  }
  CHECK(boundary == 2 * (3 * 3 + 3 * 2 + 3 * 2));
  for (int c : per_cell) CHECK(c == 6);
}

TEST_CASE("mesh construction is deterministic", "[mesh][property]") {
  const auto a = build_box_mesh(pi_box(), {3, 4, 2});
  const auto b = build_box_mesh(pi_box(), {3, 4, 2});
  CHECK(a.nodes() == b.nodes());
  CHECK(a.edges() == b.edges());
  CHECK(a.cells() == b.cells());
  for (std::size_t c = 0; c < a.num_cells(); ++c)
    for (int e = 0; e < 12; ++e) {
      CHECK(a.cell_edges()[c][e].id == b.cell_edges()[c][e].id);
      CHECK(a.cell_edges()[c][e].sign == b.cell_edges()[c][e].sign);
    }
}

TEST_CASE("cell edge references reproduce local node pairs with signs", "[mesh][property]") {
  const auto m = build_box_mesh(unit_box(), {3, 2, 2});
  for (std::size_t c = 0; c < m.num_cells(); ++c)
    for (int e = 0; e < 12; ++e) {
      const auto na = m.cells()[c][kHexEdgeNodes[e][0]];
      const auto nb = m.cells()[c][kHexEdgeNodes[e][1]];
      const auto& se = m.cell_edges()[c][e];
      const auto& ge = m.edges()[se.id];
      if (se.sign > 0) {
        CHECK(ge[0] == na);
        CHECK(ge[1] == nb);
      } else {
        CHECK(ge[0] == nb);
        CHECK(ge[1] == na);
      }
      CHECK(m.edge_axis(se.id) == hex_edge_axis(e));
    }
}

TEST_CASE("locate and reference maps round-trip", "[mesh]") {
  const auto m = build_box_mesh(pi_box(), {3, 3, 3});
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(std::numbers::pi / 2, 3 * std::numbers::pi / 2);
  for (int k = 0; k < 50; ++k) {
    const Vec3 x{u(rng), u(rng), u(rng)};
    const auto c = m.locate(x);
    REQUIRE(c >= 0);
    const auto xi = m.to_reference(static_cast<std::size_t>(c), x);
    for (int d = 0; d < 3; ++d) CHECK(std::abs(xi[d]) <= 1.0 + 1e-12);
    const auto y = m.to_physical(static_cast<std::size_t>(c), xi);
    for (int d = 0; d < 3; ++d) CHECK_THAT(y[d], WithinAbs(x[d], 1e-13));
  }
  CHECK(m.locate({0.0, 2.0, 2.0}) == -1);
}

TEST_CASE("all-air predicate gives no conductor nodes", "[mesh][regions]") {
  const auto m = build_box_mesh(unit_box(), {2, 2, 2});
  const auto t = tag_regions(m, {{Box{unit_box()}, Region::Air, 0}});
  CHECK(t.num_conductor_cells() == 0);
  CHECK(std::count(t.node_conductor.begin(), t.node_conductor.end(), true) == 0);
}

TEST_CASE("bar predicate tags exactly the cells whose centroid is inside", "[mesh][regions]") {
  const auto m = build_box_mesh({Interval{0, 0.22}, Interval{0, 0.22}, Interval{0, 0.22}}, {5, 5, 5});
  const Box bar{{Interval{0.08, 0.14}, Interval{0.08, 0.14}, Interval{0, 0.22}}};
  const auto t = tag_regions(m, {{Box{m.extents()}, Region::Air, 0}, {bar, Region::Conductor, 1}});
  std::size_t expected = 0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto x = m.cell_centroid(c);
    const bool in = x[0] >= 0.08 && x[0] <= 0.14 && x[1] >= 0.08 && x[1] <= 0.14;
    expected += in;
    CHECK(t.is_conductor_cell(c) == in);
    CHECK(t.cell_material[c] == (in ? 1 : 0));
  }
  CHECK(t.num_conductor_cells() == expected);
  CHECK(expected == 5);
  // derived node set: touching at least one conductor cell
  for (std::size_t n = 0; n < m.num_nodes(); ++n) {
    bool touch = false;
    for (std::size_t c = 0; c < m.num_cells(); ++c)
      for (auto v : m.cells()[c])
        if (v == n && t.is_conductor_cell(c)) touch = true;
    CHECK(t.node_conductor[n] == touch);
  }
}

TEST_CASE("full conductor predicate leaves no air edges", "[mesh][regions]") {
  const auto m = build_box_mesh(unit_box(), {2, 2, 2});
  const auto t = tag_regions(m, {{Box{unit_box()}, Region::Conductor, 0}});
  CHECK(std::count(t.edge_conductor.begin(), t.edge_conductor.end(), false) == 0);
}

TEST_CASE("later predicates override earlier ones", "[mesh][regions]") {
  const auto m = build_box_mesh(unit_box(), {2, 1, 1});
  const Box left{{Interval{0, 0.5}, Interval{0, 1}, Interval{0, 1}}};
  const auto t = tag_regions(m, {{Box{unit_box()}, Region::Conductor, 0}, {left, Region::Air, 1}});
  CHECK(t.cell_region[0] == Region::Air);
  CHECK(t.cell_region[1] == Region::Conductor);
}

TEST_CASE("uncovered cell raises an error", "[mesh][regions]") {
  const auto m = build_box_mesh(unit_box(), {2, 2, 2});
  const Box half{{Interval{0, 0.5}, Interval{0, 1}, Interval{0, 1}}};
  CHECK_THROWS_AS(tag_regions(m, {{half, Region::Air, 0}}), UncoveredRegion);
}

TEST_CASE("boundary tags on a single cell", "[mesh][boundary]") {
  const auto m = build_box_mesh(unit_box(), {1, 1, 1});
  const auto b = boundary_entities(m);
  for (auto l : kAllBoundaryLabels) {
    CHECK(b.nodes_of(l).size() == 4);
    CHECK(b.edges_of(l).size() == 4);
    CHECK(b.faces_of(l).size() == 1);
  }
}

TEST_CASE("boundary node union matches coordinate test", "[mesh][boundary]") {
  for (int n : {2, 3}) {
    const auto m = build_box_mesh(pi_box(), {n, n, n});
    const auto b = boundary_entities(m);
    std::set<std::size_t> all;
    for (auto l : kAllBoundaryLabels) all.insert(b.nodes_of(l).begin(), b.nodes_of(l).end());
    std::size_t by_coord = 0;
    for (std::size_t v = 0; v < m.num_nodes(); ++v) {
      bool on = false;
      for (int d = 0; d < 3; ++d) on = on || m.node(v)[d] == m.extents()[d].lo || m.node(v)[d] == m.extents()[d].hi;
      by_coord += on;
      CHECK(all.count(v) == static_cast<std::size_t>(on));
    }
    CHECK(all.size() == by_coord);
    CHECK(m.num_nodes() - all.size() == static_cast<std::size_t>((n - 1) * (n - 1) * (n - 1)));
    if (n == 2) CHECK(all.size() == 26);
  }
}

TEST_CASE("boundary labels parse and reject unknown names", "[mesh][boundary]") {
  for (auto l : kAllBoundaryLabels) CHECK(parse_boundary_label(to_string(l)) == l);
  CHECK_THROWS_AS(parse_boundary_label("Top"), UnknownLabel);
}

// ---------------------------------------------------------------------------
// quadrature

TEST_CASE("Gauss-Legendre rules integrate polynomials of degree 2n-1", "[quadrature]") {
  for (int n = 1; n <= 8; ++n) {
    const auto g = gauss_legendre(n);
    double wsum = 0.0;
    for (const auto& q : g) wsum += q.w;
    CHECK_THAT(wsum, WithinRel(2.0, 1e-14));
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (const auto& q : g) s += q.w * std::pow(q.x, deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK_THAT(s, WithinAbs(exact, 1e-13));
    }
  }
}

// ---------------------------------------------------------------------------
// spaces

TEST_CASE("scalar space free counts", "[spaces]") {
  {
    const auto m = cube(2);
    const auto s = build_scalar_space(m, boundary_entities(*m), all_faces());
    CHECK(s.n_v() == 1);
  }
  {
    const auto m = cube(1);
    const auto s = build_scalar_space(m, boundary_entities(*m), DirichletSpec::none());
    CHECK(s.n_v() == 8);
  }
  {
    const auto m = cube(2);
    DirichletSpec d;
    d.scalar = {{BoundaryLabel::Zmin, 0.0}, {BoundaryLabel::Zmax, 1.0}};
    const auto s = build_scalar_space(m, boundary_entities(*m), d);
    CHECK(s.n_v() == 27 - 18);
    for (std::size_t v = 0; v < m->num_nodes(); ++v) {
      const double z = m->node(v)[2];
      if (z == 0.0) CHECK(s.prescribed[v] == cplx(0.0));
      if (z == 1.0) CHECK(s.prescribed[v] == cplx(1.0));
    }
    // free numbering ascends with node id
    const auto& fe = s.dofs.free_entities();
    CHECK(std::is_sorted(fe.begin(), fe.end()));
  }
}

TEST_CASE("edge space free counts", "[spaces]") {
  {
    const auto m = cube(1);
    CHECK(build_edge_space(m, boundary_entities(*m), all_edges()).n_w() == 0);
  }
  {
    const auto m = cube(2);
    const auto e = build_edge_space(m, boundary_entities(*m), all_edges());
    CHECK(e.n_w() == 6);
    // brute force: an edge is interior unless both ends share a boundary plane
    std::size_t interior = 0;
    for (const auto& ed : m->edges()) {
      const auto a = m->node(ed[0]), b = m->node(ed[1]);
      bool on = false;
      for (int d = 0; d < 3; ++d)
        on = on || (a[d] == b[d] && (a[d] == 0.0 || a[d] == 1.0));
      interior += !on;
    }
    CHECK(interior == 6);
  }
  {
    const auto m = cube(2);
    CHECK(build_edge_space(m, boundary_entities(*m), DirichletSpec::none()).n_w() == 54);
  }
}

TEST_CASE("random Dirichlet combinations keep the DOF bookkeeping consistent", "[spaces][property]") {
  const auto m = build_box_mesh(unit_box(), {3, 2, 2});
  const auto mp = std::make_shared<const Mesh>(m);
  const auto tags = boundary_entities(m);
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    DirichletSpec d;
    for (auto l : kAllBoundaryLabels) {
      if (rng() % 2) d.scalar.push_back({l, cplx(double(rng() % 5), 0.0)});
      if (rng() % 2) d.edge.push_back(l);
    }
    const auto s = build_scalar_space(mp, tags, d);
    const auto e = build_edge_space(mp, tags, d);
    CHECK(s.dofs.num_free() + s.dofs.num_constrained() == m.num_nodes());
    CHECK(e.dofs.num_free() + e.dofs.num_constrained() == m.num_edges());
    std::set<std::size_t> nodes;
    for (auto& sd : d.scalar) nodes.insert(tags.nodes_of(sd.label).begin(), tags.nodes_of(sd.label).end());
    CHECK(s.dofs.num_constrained() == nodes.size());
    std::set<std::size_t> edges;
    for (auto l : d.edge) edges.insert(tags.edges_of(l).begin(), tags.edges_of(l).end());
    CHECK(e.dofs.num_constrained() == edges.size());
  }
}

TEST_CASE("scalar basis: center, Lagrange property, partition of unity", "[spaces][basis]") {
  const auto m = build_box_mesh({Interval{0, 2}, Interval{0, 1}, Interval{0, 0.5}}, {1, 1, 1});
  const auto c = eval_scalar_basis(m, 0, {0, 0, 0});
  for (double v : c.value) CHECK_THAT(v, WithinAbs(0.125, 1e-15));
  for (int a = 0; a < 8; ++a) {
    Vec3 xi{};
    for (int d = 0; d < 3; ++d) xi[d] = kHexCorner[a][d] ? 1.0 : -1.0;
    const auto b = eval_scalar_basis(m, 0, xi);
    for (int k = 0; k < 8; ++k) CHECK_THAT(b.value[k], WithinAbs(k == a ? 1.0 : 0.0, 1e-15));
  }
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 20; ++t) {
    const auto b = eval_scalar_basis(m, 0, {u(rng), u(rng), u(rng)});
    double s = 0;
    Vec3 g{};
    for (int k = 0; k < 8; ++k) {
      s += b.value[k];
      g = g + b.grad[k];
    }
    CHECK_THAT(s, WithinAbs(1.0, 1e-14));
    for (int d = 0; d < 3; ++d) CHECK_THAT(g[d], WithinAbs(0.0, 1e-13));
  }
}

TEST_CASE("scalar basis gradients match central finite differences", "[spaces][basis]") {
  const auto m = build_box_mesh({Interval{1, 1.3}, Interval{0, 0.7}, Interval{-1, 0}}, {1, 1, 1});
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  const double h = 1e-6;
  for (int t = 0; t < 10; ++t) {
    const Vec3 xi{u(rng), u(rng), u(rng)};
    const auto x = m.to_physical(0, xi);
    const auto b = eval_scalar_basis(m, 0, xi);
    for (int d = 0; d < 3; ++d) {
      Vec3 xp = x, xm = x;
      xp[d] += h;
      xm[d] -= h;
      const auto bp = eval_scalar_basis(m, 0, m.to_reference(0, xp));
      const auto bm = eval_scalar_basis(m, 0, m.to_reference(0, xm));
      for (int k = 0; k < 8; ++k) {
        const double fd = (bp.value[k] - bm.value[k]) / (2 * h);
        CHECK_THAT(b.grad[k][d], WithinAbs(fd, 1e-6 * std::max(1.0, std::abs(fd))));
      }
    }
  }
}

TEST_CASE("edge basis duality with 5-point line integrals is the identity", "[spaces][basis]") {
  for (auto ext : {unit_box(), std::array<Interval, 3>{Interval{0, 2}, Interval{1, 1.5}, Interval{0, 0.25}}}) {
    const auto m = build_box_mesh(ext, {1, 1, 1});
    const auto g = gauss_legendre(5);
    Eigen::MatrixXd dual(12, 12);
    for (int j = 0; j < 12; ++j) {
      const auto& ed = m.edges()[m.cell_edges()[0][j].id];
      const auto a = m.node(ed[0]), b = m.node(ed[1]);
      const auto t = b - a;
      for (int k = 0; k < 12; ++k) {
        double s = 0;
        for (const auto& q : g) {
          const auto x = a + (0.5 * (q.x + 1.0)) * t;
          const auto v = eval_edge_basis(m, 0, m.to_reference(0, x));
          s += 0.5 * q.w * dot(v.value[k], t);
        }
        dual(m.cell_edges()[0][j].id, m.cell_edges()[0][k].id) = s;
      }
    }
    CHECK((dual - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("edge basis curls match finite differences of values", "[spaces][basis]") {
  const auto m = build_box_mesh({Interval{0, 0.5}, Interval{0, 1}, Interval{0, 2}}, {1, 1, 1});
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  const double h = 1e-6;
  for (int t = 0; t < 10; ++t) {
    const Vec3 xi{u(rng), u(rng), u(rng)};
    const auto x = m.to_physical(0, xi);
    const auto b = eval_edge_basis(m, 0, xi);
    std::array<std::array<Vec3, 3>, 12> jac{};  // jac[k][d] = d w_k / d x_d
    for (int d = 0; d < 3; ++d) {
      Vec3 xp = x, xm = x;
      xp[d] += h;
      xm[d] -= h;
      const auto bp = eval_edge_basis(m, 0, m.to_reference(0, xp));
      const auto bm = eval_edge_basis(m, 0, m.to_reference(0, xm));
      for (int k = 0; k < 12; ++k) jac[k][d] = (1.0 / (2 * h)) * (bp.value[k] - bm.value[k]);
    }
    for (int k = 0; k < 12; ++k) {
      const Vec3 fd{jac[k][1][2] - jac[k][2][1], jac[k][2][0] - jac[k][0][2], jac[k][0][1] - jac[k][1][0]};
      for (int d = 0; d < 3; ++d) CHECK_THAT(b.curl[k][d], WithinAbs(fd[d], 1e-5));
    }
  }
}

TEST_CASE("edge moments of a trilinear gradient reproduce it exactly", "[spaces][basis]") {
  const auto m = build_box_mesh({Interval{0, 1}, Interval{0, 0.5}, Interval{0, 2}}, {1, 1, 1});
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-1, 1);
  std::array<double, 8> g{};
  for (auto& v : g) v = u(rng);
  for (int t = 0; t < 10; ++t) {
    const Vec3 xi{u(rng), u(rng), u(rng)};
    const auto sb = eval_scalar_basis(m, 0, xi);
    const auto eb = eval_edge_basis(m, 0, xi);
    Vec3 grad{}, interp{};
    for (int a = 0; a < 8; ++a) grad = grad + g[a] * sb.grad[a];
    for (int e = 0; e < 12; ++e) {
      const auto& ed = m.edges()[m.cell_edges()[0][e].id];
      // mesh node ids coincide with local corners on a single cell
      const double coeff = g[static_cast<std::size_t>(std::find(m.cells()[0].begin(), m.cells()[0].end(), ed[1]) - m.cells()[0].begin())] -
                           g[static_cast<std::size_t>(std::find(m.cells()[0].begin(), m.cells()[0].end(), ed[0]) - m.cells()[0].begin())];
      interp = interp + coeff * eb.value[e];
    }
    for (int d = 0; d < 3; ++d) CHECK_THAT(interp[d], WithinAbs(grad[d], 1e-13));
  }
}

TEST_CASE("gradient incidence columns interpolate hat-function gradients", "[spaces][property]") {
  const auto m = cube(2);
  const auto tags = boundary_entities(*m);
  const auto s = build_scalar_space(m, tags, DirichletSpec::none());
  const auto e = build_edge_space(m, tags, DirichletSpec::none());
  const auto P = dense(gradient_incidence(e, s));
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    CHECK(P.col(j).cwiseAbs().maxCoeff() == 1.0);
  }
  for (Eigen::Index i = 0; i < P.rows(); ++i) CHECK(P.row(i).cwiseAbs().sum() == 2.0);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::size_t c = 0; c < m->num_cells(); ++c)
    for (int t = 0; t < 10; ++t) {
      const Vec3 xi{u(rng), u(rng), u(rng)};
      const auto sb = eval_scalar_basis(*m, c, xi);
      const auto eb = eval_edge_basis(*m, c, xi);
      for (int a = 0; a < 8; ++a) {
        const auto j = s.dofs.dof(m->cells()[c][a]);
        Vec3 interp{};
        for (int k = 0; k < 12; ++k) {
          const auto row = e.dofs.dof(m->cell_edges()[c][k].id);
          interp = interp + P(row, j) * eb.value[k];
        }
        for (int d = 0; d < 3; ++d) REQUIRE_THAT(interp[d], WithinAbs(sb.grad[a][d], 1e-12));
      }
    }
}
