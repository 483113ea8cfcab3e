#pragma once

#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "twostep/scenario.hpp"
#include "twostep/study.hpp"

namespace twostep::testing {

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

inline std::array<Interval, 3> unit_box() { return {Interval{0, 1}, Interval{0, 1}, Interval{0, 1}}; }

inline std::shared_ptr<const Mesh> cube(int n) {
  return std::make_shared<const Mesh>(build_box_mesh(unit_box(), {n, n, n}));
}

inline DirichletSpec all_edges() {
  DirichletSpec s;
  s.edge = {kAllBoundaryLabels.begin(), kAllBoundaryLabels.end()};
  return s;
}

inline DirichletSpec all_faces(double value = 0.0) {
  DirichletSpec s = all_edges();
  for (auto l : kAllBoundaryLabels) s.scalar.push_back({l, value});
  return s;
}

inline std::vector<Material> vacuum() { return {Material{"vacuum", 0.0, kEps0, 1.0 / kMu0}}; }

inline ProblemSpec homogeneous_spec(int n, const Material& m, const DirichletSpec& d) {
  ProblemSpec p;
  p.extents = unit_box();
  p.subdivisions = {n, n, n};
  p.materials = {m};
  p.regions = {{Box{p.extents}, m.sigma > 0 ? Region::Conductor : Region::Air, 0}};
  p.dirichlet = d;
  return p;
}

inline Eigen::MatrixXd dense(const RealSparse& a) { return Eigen::MatrixXd(a); }
inline Eigen::MatrixXcd dense(const ComplexSparse& a) { return Eigen::MatrixXcd(a); }

inline Eigen::Index rank_of(const Eigen::MatrixXd& a, double rtol = 1e-9) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto s = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rtol * s[0]) ++r;
  return r;
}

inline Eigen::Index rank_of(const Eigen::MatrixXcd& a, double rtol = 1e-9) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  const auto s = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rtol * s[0]) ++r;
  return r;
}

inline ComplexVector random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
  return v;
}

inline double rel_diff(const ComplexVector& a, const ComplexVector& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace twostep::testing
