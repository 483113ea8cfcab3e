#pragma once

// Structured hexahedral box meshes with full node/edge/face/cell incidence,
// region tagging by cell centroid and boundary-face labelling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "twostep/errors.hpp"

namespace twostep {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Axis-aligned box, closed on all sides.
struct Box {
  std::array<Interval, 3> range;

  bool contains(const Vec3& p) const {
    return range[0].contains(p[0]) && range[1].contains(p[1]) && range[2].contains(p[2]);
  }
};

/// Edge reference as stored per cell: global edge id and orientation relative
/// to the local reference edge direction.
struct SignedEdge {
  std::size_t id = 0;
  int sign = 1;
};

/// Quadrilateral face with its one or two adjacent cells.
struct Face {
  std::array<std::size_t, 4> nodes{};
  int axis = 0;  // normal direction
  std::array<std::ptrdiff_t, 2> cells{-1, -1};
};

// Local hexahedron numbering (VTK_HEXAHEDRON order):
//   0:(0,0,0) 1:(1,0,0) 2:(1,1,0) 3:(0,1,0) 4:(0,0,1) 5:(1,0,1) 6:(1,1,1) 7:(0,1,1)
inline constexpr std::array<std::array<int, 3>, 8> kHexCorner = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}}};

// Local edges; each runs from the first to the second local node, along +axis.
// x-edges 0..3, y-edges 4..7, z-edges 8..11.
inline constexpr std::array<std::array<int, 2>, 12> kHexEdgeNodes = {{
    {0, 1}, {3, 2}, {4, 5}, {7, 6},
    {0, 3}, {1, 2}, {4, 7}, {5, 6},
    {0, 4}, {1, 5}, {2, 6}, {3, 7}}};

inline constexpr int hex_edge_axis(int local_edge) { return local_edge / 4; }

class Mesh {
 public:
  const std::array<Interval, 3>& extents() const { return extents_; }
  const std::array<int, 3>& subdivisions() const { return subdivisions_; }
  Vec3 spacing() const {
    return {extents_[0].length() / subdivisions_[0], extents_[1].length() / subdivisions_[1],
            extents_[2].length() / subdivisions_[2]};
  }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_faces() const { return faces_.size(); }
  std::size_t num_cells() const { return cells_.size(); }

  const std::vector<Vec3>& nodes() const { return nodes_; }
  const Vec3& node(std::size_t id) const { return nodes_[id]; }
  const std::vector<std::array<std::size_t, 2>>& edges() const { return edges_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<std::array<std::size_t, 8>>& cells() const { return cells_; }
  const std::vector<std::array<SignedEdge, 12>>& cell_edges() const { return cell_edges_; }

  /// Axis of a global edge (0 = x, 1 = y, 2 = z).
  int edge_axis(std::size_t edge) const {
    const auto& e = edges_[edge];
    const auto a = grid_index(e[0]);
    const auto b = grid_index(e[1]);
    for (int d = 0; d < 3; ++d)
      if (a[d] != b[d]) return d;
    return 0;
  }

  std::size_t node_id(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(subdivisions_[0] + 1) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(subdivisions_[1] + 1) * k);
  }
  std::array<int, 3> grid_index(std::size_t node) const {
    const auto nx = static_cast<std::size_t>(subdivisions_[0] + 1);
    const auto ny = static_cast<std::size_t>(subdivisions_[1] + 1);
    return {static_cast<int>(node % nx), static_cast<int>((node / nx) % ny),
            static_cast<int>(node / (nx * ny))};
  }
  std::size_t cell_id(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(subdivisions_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(subdivisions_[1]) * k);
  }

  Vec3 cell_origin(std::size_t cell) const { return nodes_[cells_[cell][0]]; }
  Vec3 cell_centroid(std::size_t cell) const {
    const auto h = spacing();
    return cell_origin(cell) + Vec3{0.5 * h[0], 0.5 * h[1], 0.5 * h[2]};
  }

  /// Cell containing p (closed boundaries go to the lower-index cell side);
  /// -1 when p is outside the domain.
  std::ptrdiff_t locate(const Vec3& p) const {
    std::array<int, 3> idx{};
    for (int d = 0; d < 3; ++d) {
      const auto& r = extents_[d];
      if (!(p[d] >= r.lo && p[d] <= r.hi)) return -1;
      const double t = (p[d] - r.lo) / r.length() * subdivisions_[d];
      idx[d] = std::clamp(static_cast<int>(std::floor(t)), 0, subdivisions_[d] - 1);
    }
    return static_cast<std::ptrdiff_t>(cell_id(idx[0], idx[1], idx[2]));
  }

  /// Map a physical point to reference coordinates [-1,1]^3 of a cell.
  Vec3 to_reference(std::size_t cell, const Vec3& p) const {
    const auto o = cell_origin(cell);
    const auto h = spacing();
    return {2.0 * (p[0] - o[0]) / h[0] - 1.0, 2.0 * (p[1] - o[1]) / h[1] - 1.0,
            2.0 * (p[2] - o[2]) / h[2] - 1.0};
  }
  Vec3 to_physical(std::size_t cell, const Vec3& xi) const {
    const auto o = cell_origin(cell);
    const auto h = spacing();
    return {o[0] + 0.5 * (xi[0] + 1.0) * h[0], o[1] + 0.5 * (xi[1] + 1.0) * h[1],
            o[2] + 0.5 * (xi[2] + 1.0) * h[2]};
  }

 private:
  friend Mesh build_box_mesh(const std::array<Interval, 3>&, const std::array<int, 3>&);

  std::array<Interval, 3> extents_{};
  std::array<int, 3> subdivisions_{};
  std::vector<Vec3> nodes_;
  std::vector<std::array<std::size_t, 2>> edges_;
  std::vector<Face> faces_;
  std::vector<std::array<std::size_t, 8>> cells_;
  std::vector<std::array<SignedEdge, 12>> cell_edges_;
};

/// Build an axis-aligned box mesh. Nodes, cells, and per-axis entity blocks
/// are numbered lexicographically with x fastest; edges are numbered axis by
/// axis (all x-edges, then y, then z), faces likewise by normal axis.
inline Mesh build_box_mesh(const std::array<Interval, 3>& extents, const std::array<int, 3>& subdivisions) {
  for (int d = 0; d < 3; ++d) {
    if (subdivisions[d] < 1)
      throw InvalidArgument("build_box_mesh: subdivision count must be positive on axis " + std::to_string(d));
    if (!(extents[d].hi > extents[d].lo))
      throw InvalidArgument("build_box_mesh: empty interval on axis " + std::to_string(d));
  }

  Mesh m;
  m.extents_ = extents;
  m.subdivisions_ = subdivisions;
  const int nx = subdivisions[0], ny = subdivisions[1], nz = subdivisions[2];

  m.nodes_.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        // Endpoints are taken verbatim so boundary coordinates compare exactly.
        auto coord = [](const Interval& r, int t, int n) {
          return t == n ? r.hi : r.lo + (r.hi - r.lo) * static_cast<double>(t) / n;
        };
        m.nodes_.push_back({coord(extents[0], i, nx), coord(extents[1], j, ny), coord(extents[2], k, nz)});
      }

  // Edge id lookup: per axis, lexicographic over the edge's lower node.
  std::array<std::size_t, 3> edge_offset{};
  std::array<std::array<int, 3>, 3> edge_dims{};
  std::size_t count = 0;
  for (int a = 0; a < 3; ++a) {
    edge_offset[a] = count;
    for (int d = 0; d < 3; ++d) edge_dims[a][d] = subdivisions[d] + (d == a ? 0 : 1);
    count += static_cast<std::size_t>(edge_dims[a][0]) * edge_dims[a][1] * edge_dims[a][2];
  }
  auto edge_id = [&](int a, int i, int j, int k) {
    const auto& dm = edge_dims[a];
    return edge_offset[a] + static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dm[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(dm[1]) * k);
  };

  m.edges_.resize(count);
  for (int a = 0; a < 3; ++a) {
    const auto& dm = edge_dims[a];
    for (int k = 0; k < dm[2]; ++k)
      for (int j = 0; j < dm[1]; ++j)
        for (int i = 0; i < dm[0]; ++i) {
          std::array<int, 3> hi{i, j, k};
          hi[a] += 1;
          m.edges_[edge_id(a, i, j, k)] = {m.node_id(i, j, k), m.node_id(hi[0], hi[1], hi[2])};
        }
  }

  m.cells_.reserve(static_cast<std::size_t>(nx) * ny * nz);
  m.cell_edges_.reserve(m.cells_.capacity());
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        std::array<std::size_t, 8> cn{};
        for (int c = 0; c < 8; ++c)
          cn[c] = m.node_id(i + kHexCorner[c][0], j + kHexCorner[c][1], k + kHexCorner[c][2]);
        std::array<SignedEdge, 12> ce{};
        for (int e = 0; e < 12; ++e) {
          const auto& lo = kHexCorner[kHexEdgeNodes[e][0]];
          const auto id = edge_id(hex_edge_axis(e), i + lo[0], j + lo[1], k + lo[2]);
          const auto& ge = m.edges_[id];
          ce[e] = {id, ge[0] == cn[kHexEdgeNodes[e][0]] ? 1 : -1};
        }
        m.cells_.push_back(cn);
        m.cell_edges_.push_back(ce);
      }

  // Faces by normal axis, lexicographic over the lower corner.
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    std::array<int, 3> dm{};
    for (int d = 0; d < 3; ++d) dm[d] = subdivisions[d] + (d == a ? 1 : 0);
    for (int k = 0; k < dm[2]; ++k)
      for (int j = 0; j < dm[1]; ++j)
        for (int i = 0; i < dm[0]; ++i) {
          std::array<int, 3> p{i, j, k};
          Face f;
          f.axis = a;
          std::array<int, 3> q = p;
          f.nodes[0] = m.node_id(q[0], q[1], q[2]);
          q[b] += 1;
          f.nodes[1] = m.node_id(q[0], q[1], q[2]);
          q[c] += 1;
          f.nodes[2] = m.node_id(q[0], q[1], q[2]);
          q[b] -= 1;
          f.nodes[3] = m.node_id(q[0], q[1], q[2]);
          int slot = 0;
          if (p[a] > 0) {
            auto lower = p;
            lower[a] -= 1;
            f.cells[slot++] = static_cast<std::ptrdiff_t>(m.cell_id(lower[0], lower[1], lower[2]));
          }
          if (p[a] < subdivisions[a]) f.cells[slot] = static_cast<std::ptrdiff_t>(m.cell_id(p[0], p[1], p[2]));
          m.faces_.push_back(f);
        }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Regions

enum class Region : std::uint8_t { Air, Conductor };

struct RegionPredicate {
  Box box;
  Region region = Region::Air;
  int material = 0;  // index into the scenario's material table
};

struct RegionTags {
  std::vector<Region> cell_region;
  std::vector<int> cell_material;
  std::vector<bool> node_conductor;  // node touches at least one conductor cell
  std::vector<bool> edge_conductor;  // edge touches at least one conductor cell

  bool is_conductor_cell(std::size_t c) const { return cell_region[c] == Region::Conductor; }
  std::size_t num_conductor_cells() const {
    return static_cast<std::size_t>(std::count(cell_region.begin(), cell_region.end(), Region::Conductor));
  }
};

/// Label cells by centroid membership; later predicates override earlier ones.
inline RegionTags tag_regions(const Mesh& mesh, const std::vector<RegionPredicate>& predicates) {
  RegionTags t;
  t.cell_region.assign(mesh.num_cells(), Region::Air);
  t.cell_material.assign(mesh.num_cells(), -1);
  t.node_conductor.assign(mesh.num_nodes(), false);
  t.edge_conductor.assign(mesh.num_edges(), false);

  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto x = mesh.cell_centroid(c);
    bool hit = false;
    for (const auto& p : predicates) {
      if (p.box.contains(x)) {
        t.cell_region[c] = p.region;
        t.cell_material[c] = p.material;
        hit = true;
      }
    }
    if (!hit)
      throw UncoveredRegion(c, "tag_regions: cell " + std::to_string(c) + " centroid is not covered by any region");
    if (t.cell_region[c] == Region::Conductor) {
      for (auto n : mesh.cells()[c]) t.node_conductor[n] = true;
      for (const auto& e : mesh.cell_edges()[c]) t.edge_conductor[e.id] = true;
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Boundary

enum class BoundaryLabel : std::uint8_t { Xmin, Xmax, Ymin, Ymax, Zmin, Zmax };

inline constexpr std::array<BoundaryLabel, 6> kAllBoundaryLabels = {
    BoundaryLabel::Xmin, BoundaryLabel::Xmax, BoundaryLabel::Ymin,
    BoundaryLabel::Ymax, BoundaryLabel::Zmin, BoundaryLabel::Zmax};

inline std::string_view to_string(BoundaryLabel l) {
  constexpr std::array<std::string_view, 6> names = {"Xmin", "Xmax", "Ymin", "Ymax", "Zmin", "Zmax"};
  return names[static_cast<int>(l)];
}

inline BoundaryLabel parse_boundary_label(std::string_view s) {
  for (auto l : kAllBoundaryLabels)
    if (to_string(l) == s) return l;
  throw UnknownLabel("unknown boundary label '" + std::string(s) + "'");
}

struct BoundaryTags {
  std::array<std::vector<std::size_t>, 6> nodes;  // sorted ids per label
  std::array<std::vector<std::size_t>, 6> edges;
  std::array<std::vector<std::size_t>, 6> faces;

  const std::vector<std::size_t>& nodes_of(BoundaryLabel l) const { return nodes[static_cast<int>(l)]; }
  const std::vector<std::size_t>& edges_of(BoundaryLabel l) const { return edges[static_cast<int>(l)]; }
  const std::vector<std::size_t>& faces_of(BoundaryLabel l) const { return faces[static_cast<int>(l)]; }
};

inline BoundaryTags boundary_entities(const Mesh& mesh) {
  BoundaryTags b;
  const auto& n = mesh.subdivisions();
  auto on = [&](std::size_t node, BoundaryLabel l) {
    const int li = static_cast<int>(l);
    const int axis = li / 2;
    const auto g = mesh.grid_index(node);
    return g[axis] == (li % 2 == 0 ? 0 : n[axis]);
  };
  for (auto l : kAllBoundaryLabels) {
    const int li = static_cast<int>(l);
    for (std::size_t v = 0; v < mesh.num_nodes(); ++v)
      if (on(v, l)) b.nodes[li].push_back(v);
    for (std::size_t e = 0; e < mesh.num_edges(); ++e)
      if (on(mesh.edges()[e][0], l) && on(mesh.edges()[e][1], l)) b.edges[li].push_back(e);
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
      const auto& face = mesh.faces()[f];
      if (face.axis == li / 2 && face.cells[1] < 0 && on(face.nodes[0], l)) b.faces[li].push_back(f);
    }
  }
  return b;
}

}  // namespace twostep
