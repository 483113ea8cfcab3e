#pragma once

// Direct sparse solves and 2-norm condition estimates.

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string_view>

#include "twostep/errors.hpp"
#include "twostep/spaces.hpp"

namespace twostep {

/// Relative pivot below which a factorization is declared singular.
inline constexpr double kPivotThreshold = 1e-14;

namespace detail {

// Exposes the diagonal of U, which SparseLU keeps inside its supernodal L store.
class PivotedSparseLU : public Eigen::SparseLU<ComplexSparse, Eigen::COLAMDOrdering<int>> {
 public:
  double min_abs_pivot() const {
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < this->cols(); ++j) {
      double d = 0.0;
      for (SCMatrix::InnerIterator it(m_Lstore, j); it; ++it)
        if (it.index() == j) d = std::abs(it.value());
      m = std::min(m, d);
    }
    return m;
  }
};

}  // namespace detail

/// LU factorization of a row-equilibrated complex sparse matrix.
///
/// Each row is scaled by the inverse of its largest magnitude before
/// factoring; the pivot test then compares against a unit-max matrix.
class SparseFactorization {
 public:
  explicit SparseFactorization(const ComplexSparse& a) : n_(a.rows()) {
    if (a.rows() != a.cols()) throw InvalidArgument("sparse LU: matrix is not square");
    row_scale_ = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index k = 0; k < a.outerSize(); ++k)
      for (ComplexSparse::InnerIterator it(a, k); it; ++it)
        row_scale_[it.row()] = std::max(row_scale_[it.row()], std::abs(it.value()));
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (row_scale_[i] == 0.0) throw SingularMatrix(0.0, "sparse LU: matrix has an empty row " + std::to_string(i));
      row_scale_[i] = 1.0 / row_scale_[i];
    }
    ComplexSparse scaled = row_scale_.cast<cplx>().asDiagonal() * a;
    scaled.makeCompressed();
    lu_.analyzePattern(scaled);
    lu_.factorize(scaled);
    if (lu_.info() != Eigen::Success) throw SingularMatrix(0.0, "sparse LU: factorization failed (" + lu_.lastErrorMessage() + ")");
    double amax = 0.0;
    for (Eigen::Index k = 0; k < scaled.outerSize(); ++k)
      for (ComplexSparse::InnerIterator it(scaled, k); it; ++it) amax = std::max(amax, std::abs(it.value()));
    min_pivot_ = lu_.min_abs_pivot() / amax;
    if (min_pivot_ < kPivotThreshold)
      throw SingularMatrix(min_pivot_, "sparse LU: numerically singular (relative pivot " + std::to_string(min_pivot_) + ")");
  }

  ComplexVector solve(const ComplexVector& b) const {
    ComplexVector rb = row_scale_.cast<cplx>().asDiagonal() * b;
    return lu_.solve(rb);
  }
  /// Solves A^H y = c.
  ComplexVector solve_adjoint(const ComplexVector& c) const {
    ComplexVector z = const_cast<detail::PivotedSparseLU&>(lu_).adjoint().solve(c);
    return row_scale_.cast<cplx>().asDiagonal() * z;
  }
  double min_relative_pivot() const { return min_pivot_; }
  Eigen::Index size() const { return n_; }

 private:
  Eigen::Index n_;
  Eigen::VectorXd row_scale_;
  detail::PivotedSparseLU lu_;
  double min_pivot_ = 0.0;
};

struct SolveReport {
  ComplexVector x;
  double relative_residual = 0.0;  // ||A x - b|| / ||b||, recomputed from A
  double min_relative_pivot = 0.0;
  double wall_ms = 0.0;
};

inline double relative_residual(const ComplexSparse& a, const ComplexVector& x, const ComplexVector& b) {
  const double nb = b.norm();
  const double r = (a * x - b).norm();
  return nb > 0.0 ? r / nb : r;
}

inline SolveReport sparse_lu_solve(const ComplexSparse& a, const ComplexVector& b) {
  if (a.rows() != b.size()) throw InvalidArgument("sparse LU: right-hand side size mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  SparseFactorization f(a);
  SolveReport rep;
  rep.x = f.solve(b);
  rep.min_relative_pivot = f.min_relative_pivot();
  rep.relative_residual = relative_residual(a, rep.x, b);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---------------------------------------------------------------------------

enum class CondMethod { Auto, DenseSvd, PowerIteration };

inline std::string_view to_string(CondMethod m) {
  switch (m) {
    case CondMethod::DenseSvd: return "dense-svd";
    case CondMethod::PowerIteration: return "power-iteration";
    default: return "auto";
  }
}

struct ConditionEstimate {
  double value = 1.0;  // infinity when singular
  CondMethod method = CondMethod::DenseSvd;
  bool singular = false;
  int iterations_max = 0;
  int iterations_min = 0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

inline constexpr Eigen::Index kDenseConditionLimit = 2000;

inline Eigen::VectorXd singular_values(const Eigen::MatrixXcd& a) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
  return svd.singularValues();
}

inline ConditionEstimate condition_dense(const Eigen::MatrixXcd& a) {
  ConditionEstimate c;
  c.method = CondMethod::DenseSvd;
  const auto s = singular_values(a);
  c.sigma_max = s.size() ? s[0] : 0.0;
  c.sigma_min = s.size() ? s[s.size() - 1] : 0.0;
  const double tol = static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon() * c.sigma_max;
  if (c.sigma_min <= tol) {
    c.singular = true;
    c.value = std::numeric_limits<double>::infinity();
  } else {
    c.value = c.sigma_max / c.sigma_min;
  }
  return c;
}

/// Power iteration on A^H A for sigma_max and inverse iteration through the
/// sparse factorization for sigma_min.
inline ConditionEstimate condition_power(const ComplexSparse& a, int max_iter = 200, double rtol = 1e-6) {
  ConditionEstimate c;
  c.method = CondMethod::PowerIteration;
  const auto n = a.rows();
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> nd;
  ComplexVector start(n);
  for (Eigen::Index i = 0; i < n; ++i) start[i] = cplx(nd(rng), nd(rng));
  start.normalize();

  auto iterate = [&](auto&& apply, int& iters) {
    ComplexVector x = start;
    double lambda = 0.0;
    for (iters = 1; iters <= max_iter; ++iters) {
      ComplexVector y = apply(x);
      const double next = y.norm();
      if (next == 0.0) return 0.0;
      x = y / next;
      const bool done = lambda > 0.0 && std::abs(next - lambda) <= rtol * next;
      lambda = next;
      if (done) break;
    }
    iters = std::min(iters, max_iter);
    return lambda;
  };

  const ComplexSparse ah = a.adjoint();
  c.sigma_max = std::sqrt(iterate([&](const ComplexVector& x) -> ComplexVector { return ah * (a * x); }, c.iterations_max));
  try {
    SparseFactorization f(a);
    const double inv = iterate([&](const ComplexVector& x) { return f.solve(f.solve_adjoint(x)); }, c.iterations_min);
    c.sigma_min = inv > 0.0 ? 1.0 / std::sqrt(inv) : 0.0;
  } catch (const SingularMatrix&) {
    c.sigma_min = 0.0;
  }
  if (c.sigma_min == 0.0) {
    c.singular = true;
    c.value = std::numeric_limits<double>::infinity();
  } else {
    c.value = c.sigma_max / c.sigma_min;
  }
  return c;
}

inline ConditionEstimate condition_estimate(const ComplexSparse& a, CondMethod method = CondMethod::Auto) {
  if (a.rows() != a.cols()) throw InvalidArgument("condition_estimate: matrix is not square");
  if (method == CondMethod::Auto) method = a.rows() <= kDenseConditionLimit ? CondMethod::DenseSvd : CondMethod::PowerIteration;
  if (method == CondMethod::DenseSvd) return condition_dense(Eigen::MatrixXcd(a));
  return condition_power(a);
}

}  // namespace twostep
