#pragma once

// Line-oriented scenario configuration.
//
//   # comment
//   domain           = xmin xmax ymin ymax zmin zmax
//   subdivisions     = nx ny nz
//   material         = <name> [sigma=<S/m>] [eps_r=<1>] [mu_r=<1>]
//   region           = <material> xmin xmax ymin ymax zmin zmax      (repeatable, last match wins)
//   scalar_dirichlet = <label|all> <value>                             (repeatable)
//   edge_dirichlet   = <label|all> [<label> ...]                       (repeatable)
//   source           = none | manufactured
//   methods          = original, tree-cotree, lagrange
//
// Numbers accept a trailing "pi" factor ("1.5pi", "pi"). A region is a
// conductor exactly when its material has sigma > 0.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "twostep/physics.hpp"

namespace twostep {

struct Scenario {
  ProblemSpec problem;
  std::vector<Method> methods{Method::Original, Method::TreeCotree};
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, std::string_view seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string_view::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline double parse_number(const std::string& tok, int line) {
  std::string s = tok;
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = std::numbers::pi;
    s.resize(s.size() - 2);
    if (s.empty()) return factor;
  }
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ConfigError(line, "invalid number '" + tok + "'");
  return v * factor;
}

inline int parse_int(const std::string& tok, int line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ConfigError(line, "invalid integer '" + tok + "'");
  return v;
}

inline std::vector<BoundaryLabel> parse_labels(const std::string& tok, int line) {
  if (tok == "all") return {kAllBoundaryLabels.begin(), kAllBoundaryLabels.end()};
  try {
    return {parse_boundary_label(tok)};
  } catch (const UnknownLabel&) {
    throw ConfigError(line, "unknown boundary label '" + tok + "'");
  }
}

}  // namespace detail

inline Scenario parse_scenario(std::string_view text) {
  using detail::parse_number;
  Scenario sc;
  ProblemSpec& p = sc.problem;
  bool have_domain = false, have_subdiv = false;
  std::map<std::string, int> material_index;
  struct PendingRegion {
    std::string material;
    Box box;
    int line;
  };
  std::vector<PendingRegion> regions;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = detail::trim(std::string_view(raw).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    const auto tok = detail::split(value, " \t");

    if (key == "domain") {
      if (tok.size() != 6) throw ConfigError(line, "domain needs 6 numbers");
      for (int d = 0; d < 3; ++d)
        p.extents[d] = Interval{parse_number(tok[2 * d], line), parse_number(tok[2 * d + 1], line)};
      have_domain = true;
    } else if (key == "subdivisions") {
      if (tok.size() != 3) throw ConfigError(line, "subdivisions needs 3 integers");
      for (int d = 0; d < 3; ++d) p.subdivisions[d] = detail::parse_int(tok[d], line);
      have_subdiv = true;
    } else if (key == "material") {
      if (tok.empty()) throw ConfigError(line, "material needs a name");
      Material m;
      m.name = tok[0];
      double eps_r = 1.0, mu_r = 1.0;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto kv = tok[i].find('=');
        if (kv == std::string::npos) throw ConfigError(line, "material attribute must be name=value");
        const auto k = tok[i].substr(0, kv);
        const double v = parse_number(tok[i].substr(kv + 1), line);
        if (k == "sigma") m.sigma = v;
        else if (k == "eps_r") eps_r = v;
        else if (k == "mu_r") mu_r = v;
        else throw ConfigError(line, "unknown material attribute '" + k + "'");
      }
      m.eps = eps_r * kEps0;
      m.nu = 1.0 / (mu_r * kMu0);
      if (material_index.count(m.name)) throw ConfigError(line, "duplicate material '" + m.name + "'");
      material_index[m.name] = static_cast<int>(p.materials.size());
      p.materials.push_back(m);
    } else if (key == "region") {
      if (tok.size() != 7) throw ConfigError(line, "region needs a material and 6 numbers");
      Box b;
      for (int d = 0; d < 3; ++d) b.range[d] = Interval{parse_number(tok[1 + 2 * d], line), parse_number(tok[2 + 2 * d], line)};
      regions.push_back({tok[0], b, line});
    } else if (key == "scalar_dirichlet") {
      if (tok.size() != 2) throw ConfigError(line, "scalar_dirichlet needs a label and a value");
      const double v = parse_number(tok[1], line);
      for (auto l : detail::parse_labels(tok[0], line)) p.dirichlet.scalar.push_back({l, cplx(v, 0.0)});
    } else if (key == "edge_dirichlet") {
      if (tok.empty()) throw ConfigError(line, "edge_dirichlet needs at least one label");
      for (const auto& t : tok)
        for (auto l : detail::parse_labels(t, line))
          if (std::find(p.dirichlet.edge.begin(), p.dirichlet.edge.end(), l) == p.dirichlet.edge.end())
            p.dirichlet.edge.push_back(l);
    } else if (key == "source") {
      if (value == "none") p.source = SourceKind::None;
      else if (value == "manufactured") p.source = SourceKind::Manufactured;
      else throw ConfigError(line, "unknown source '" + value + "'");
    } else if (key == "methods") {
      sc.methods.clear();
      for (const auto& m : detail::split(value, ", \t")) {
        try {
          sc.methods.push_back(parse_method(m));
        } catch (const InvalidArgument& e) {
          throw ConfigError(line, e.what());
        }
      }
      if (sc.methods.empty()) throw ConfigError(line, "methods list is empty");
    } else {
      throw ConfigError(line, "unknown key '" + key + "'");
    }
  }

  if (!have_domain) throw ConfigError(0, "missing required field 'domain'");
  if (!have_subdiv) throw ConfigError(0, "missing required field 'subdivisions'");
  if (p.materials.empty()) throw ConfigError(0, "missing required field 'material'");
  if (regions.empty()) throw ConfigError(0, "missing required field 'region'");
  for (const auto& r : regions) {
    const auto it = material_index.find(r.material);
    if (it == material_index.end()) throw ConfigError(r.line, "region references unknown material '" + r.material + "'");
    const auto& m = p.materials[static_cast<std::size_t>(it->second)];
    p.regions.push_back({r.box, m.sigma > 0.0 ? Region::Conductor : Region::Air, it->second});
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

// ---------------------------------------------------------------------------
// Built-in scenarios

/// Three conducting bars (two outer bars and a centre block of different
/// conductivity) along z in a 22 cm dielectric box; phi = 0 / 1 on the
/// z faces, A x n = 0 on the whole boundary.
inline ProblemSpec academic_spec(int subdivisions) {
  ProblemSpec p;
  const double L = 0.22;
  p.extents = {Interval{0, L}, Interval{0, L}, Interval{0, L}};
  p.subdivisions = {subdivisions, subdivisions, subdivisions};
  auto mat = [](std::string name, double sigma, double eps_r) {
    return Material{std::move(name), sigma, eps_r * kEps0, 1.0 / kMu0};
  };
  p.materials = {mat("air_outer", 0.0, 5.0), mat("air_center", 0.0, 1.0), mat("bar", 5.0, 5.0),
                 mat("bar_center", 1.0, 1.0)};
  auto box = [](double x0, double x1, double y0, double y1, double z0, double z1) {
    return Box{{Interval{x0, x1}, Interval{y0, y1}, Interval{z0, z1}}};
  };
  p.regions = {
      {box(0, L, 0, L, 0, L), Region::Air, 0},
      {box(0, L, 0, L, 0.10, 0.12), Region::Air, 1},
      {box(0.10, 0.12, 0.10, 0.12, 0, L), Region::Conductor, 2},
      {box(0.10, 0.12, 0.10, 0.12, 0.10, 0.12), Region::Conductor, 3},
  };
  p.dirichlet.scalar = {{BoundaryLabel::Zmin, 0.0}, {BoundaryLabel::Zmax, 1.0}};
  p.dirichlet.edge = {kAllBoundaryLabels.begin(), kAllBoundaryLabels.end()};
  return p;
}

/// Manufactured-solution box (pi/2, 3pi/2)^3 with homogeneous material.
inline ProblemSpec manufactured_spec(int subdivisions, double sigma) {
  ProblemSpec p;
  p.extents = ManufacturedCase::domain();
  p.subdivisions = {subdivisions, subdivisions, subdivisions};
  p.materials = {Material{"medium", sigma, kEps0, 1.0 / kMu0}};
  Box all{p.extents};
  p.regions = {{all, sigma > 0.0 ? Region::Conductor : Region::Air, 0}};
  for (auto l : kAllBoundaryLabels) p.dirichlet.scalar.push_back({l, 0.0});
  p.dirichlet.edge = {kAllBoundaryLabels.begin(), kAllBoundaryLabels.end()};
  p.source = SourceKind::Manufactured;
  return p;
}

}  // namespace twostep
