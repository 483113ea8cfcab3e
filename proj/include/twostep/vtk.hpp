#pragma once

// Legacy ASCII VTK export (UNSTRUCTURED_GRID of hexahedra).

#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "twostep/physics.hpp"

namespace twostep {

/// A uniformly refined hexahedral sampling grid over the mesh extents:
/// `refine` sub-cells per mesh cell along each axis.
struct SampleGrid {
  std::array<int, 3> n{};  // cells per axis
  std::vector<Vec3> points;
  std::vector<std::array<std::size_t, 8>> cells;
};

inline SampleGrid sample_grid(const Mesh& mesh, int refine) {
  if (refine < 1) throw InvalidArgument("sample_grid: refine must be >= 1");
  SampleGrid g;
  for (int d = 0; d < 3; ++d) g.n[d] = mesh.subdivisions()[d] * refine;
  const auto& ext = mesh.extents();
  auto coord = [&](int d, int i) {
    if (i == g.n[d]) return ext[d].hi;
    return ext[d].lo + ext[d].length() * static_cast<double>(i) / g.n[d];
  };
  for (int k = 0; k <= g.n[2]; ++k)
    for (int j = 0; j <= g.n[1]; ++j)
      for (int i = 0; i <= g.n[0]; ++i) g.points.push_back({coord(0, i), coord(1, j), coord(2, k)});
  auto id = [&](int i, int j, int k) {
    return static_cast<std::size_t>(i + (g.n[0] + 1) * (j + (g.n[1] + 1) * k));
  };
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        std::array<std::size_t, 8> c{};
        for (int v = 0; v < 8; ++v) c[v] = id(i + kHexCorner[v][0], j + kHexCorner[v][1], k + kHexCorner[v][2]);
        g.cells.push_back(c);
      }
  return g;
}

struct VtkField {
  std::string name;
  std::vector<Vec3> values;  // one per point
};

inline void write_vtk(std::ostream& os, const SampleGrid& g, const std::vector<VtkField>& fields,
                      const std::string& title = "twostep fields") {
  char buf[96];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << g.points.size() << " double\n";
  for (const auto& p : g.points) os << num(p[0]) << ' ' << num(p[1]) << ' ' << num(p[2]) << '\n';
  os << "CELLS " << g.cells.size() << ' ' << g.cells.size() * 9 << '\n';
  for (const auto& c : g.cells) {
    os << 8;
    for (auto v : c) os << ' ' << v;
    os << '\n';
  }
  os << "CELL_TYPES " << g.cells.size() << '\n';
  for (std::size_t c = 0; c < g.cells.size(); ++c) os << "12\n";
  if (fields.empty()) return;
  os << "POINT_DATA " << g.points.size() << '\n';
  for (const auto& f : fields) {
    if (f.values.size() != g.points.size()) throw InvalidArgument("write_vtk: field '" + f.name + "' has wrong length");
    os << "VECTORS " << f.name << " double\n";
    for (const auto& v : f.values) os << num(v[0]) << ' ' << num(v[1]) << ' ' << num(v[2]) << '\n';
  }
}

/// Re/Im point fields of B, E, D, J and their e/m parts.
inline std::vector<VtkField> sample_fields(const DerivedFields& fields, const SampleGrid& g) {
  using Getter = std::function<const CVec3&(const FieldSample&)>;
  const std::vector<std::pair<std::string, Getter>> which = {
      {"B", [](const FieldSample& s) -> const CVec3& { return s.B; }},
      {"E", [](const FieldSample& s) -> const CVec3& { return s.E; }},
      {"D", [](const FieldSample& s) -> const CVec3& { return s.D; }},
      {"D_e", [](const FieldSample& s) -> const CVec3& { return s.D_e; }},
      {"D_m", [](const FieldSample& s) -> const CVec3& { return s.D_m; }},
      {"J", [](const FieldSample& s) -> const CVec3& { return s.J; }},
      {"J_e", [](const FieldSample& s) -> const CVec3& { return s.J_e; }},
      {"J_m", [](const FieldSample& s) -> const CVec3& { return s.J_m; }},
  };
  std::vector<VtkField> out;
  for (const auto& [name, get] : which) {
    out.push_back({"Re_" + name, {}});
    out.push_back({"Im_" + name, {}});
  }
  for (const auto& x : g.points) {
    const auto s = fields.sample(x);
    for (std::size_t k = 0; k < which.size(); ++k) {
      const auto& v = which[k].second(s);
      out[2 * k].values.push_back({v[0].real(), v[1].real(), v[2].real()});
      out[2 * k + 1].values.push_back({v[0].imag(), v[1].imag(), v[2].imag()});
    }
  }
  return out;
}

inline void export_vtk(const std::string& path, const Mesh& mesh, const DerivedFields* fields, int refine) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write '" + path + "'");
  const auto g = sample_grid(mesh, refine);
  write_vtk(os, g, fields ? sample_fields(*fields, g) : std::vector<VtkField>{});
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace twostep
