#pragma once

// Frequency sweeps, convergence studies and the structural invariant suite.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "twostep/physics.hpp"

namespace twostep {

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

/// Logarithmically spaced frequencies, endpoints included.
inline std::vector<double> logspace(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw InvalidArgument("logspace: need 0 < lo <= hi and count >= 1");
  std::vector<double> out;
  if (count == 1) return {lo};
  const double a = std::log10(lo), b = std::log10(hi);
  for (int k = 0; k < count; ++k) out.push_back(std::pow(10.0, a + (b - a) * k / (count - 1)));
  out.back() = hi;
  out.front() = lo;
  return out;
}

/// Runs fn(i) for i in [0, n) on a small worker pool.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Sweep

enum class Quantity { Condition, DeltaD, HcurlError, SolveResidual };

inline Quantity parse_quantity(std::string_view s) {
  if (s == "condition") return Quantity::Condition;
  if (s == "delta_D") return Quantity::DeltaD;
  if (s == "hcurl_error") return Quantity::HcurlError;
  if (s == "solve_residual") return Quantity::SolveResidual;
  throw InvalidArgument("unknown sweep quantity '" + std::string(s) + "'");
}

struct SweepSpec {
  std::vector<double> frequencies;
  std::vector<Method> methods{Method::Original, Method::TreeCotree};
  std::vector<Quantity> quantities{Quantity::Condition, Quantity::DeltaD, Quantity::SolveResidual};
  bool timing = false;
  unsigned threads = 1;

  bool wants(Quantity q) const { return std::find(quantities.begin(), quantities.end(), q) != quantities.end(); }
};

struct SweepRow {
  double f_hz = 0.0;
  Method method = Method::Original;
  std::optional<ConditionEstimate> condition;
  bool singular = false;          // the curl-step factorization failed
  std::string failure;            // non-empty when the point could not be evaluated
  double delta_D = 0.0;
  double a_norm = 0.0;
  double rel_residual = 0.0;
  std::optional<double> hcurl_error;
  std::size_t n_dofs = 0;
  double wall_ms = 0.0;
};

inline constexpr const char* kSweepSchema = "# twostep sweep v1";

inline SweepRow sweep_point(const Problem& p, double f_hz, Method method, const SweepSpec& spec) {
  SweepRow row;
  row.f_hz = f_hz;
  row.method = method;
  const auto t0 = std::chrono::steady_clock::now();
  const auto fp = FrequencyPoint::hz(f_hz);
  const double omega = fp.omega();
  try {
    if (p.manufactured && !p.manufactured->defined_at(omega))
      throw InvalidArgument("manufactured sources with sigma > 0 are not defined at f = 0");
    auto [q_s, j_s] = source_vectors(p, omega);
    const auto eqs = solve_eqs(p, omega, q_s);
    MatrixBundle b_src = p.bundle;
    b_src.j_s = j_s;
    const auto j = build_rhs(b_src, omega, eqs.x);
    const auto sys = curl_step_system(p, omega, method, j);
    row.n_dofs = static_cast<std::size_t>(sys.matrix.rows());
    if (spec.wants(Quantity::Condition)) row.condition = condition_estimate(sys.matrix);
    try {
      const auto rep = sparse_lu_solve(sys.matrix, sys.rhs);
      ComplexVector a;
      const auto nw = static_cast<Eigen::Index>(p.bundle.n_w());
      if (method == Method::TreeCotree) a = unorder(rep.x, p.partition);
      else a = rep.x.head(nw);
      row.rel_residual = rep.relative_residual;
      row.delta_D = gauge_residual(p.bundle, omega, a);
      row.a_norm = a.norm();
      if (spec.wants(Quantity::HcurlError) && p.manufactured) row.hcurl_error = hcurl_error(p, a, *p.manufactured);
    } catch (const SingularMatrix&) {
      row.singular = true;
    }
  } catch (const SingularMatrix&) {
    row.failure = "singular";
  } catch (const StaticSingularity&) {
    row.failure = "singular";
  } catch (const Error&) {
    row.failure = "n/a";
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

inline std::vector<SweepRow> frequency_sweep(const Problem& p, const SweepSpec& spec) {
  if (spec.frequencies.empty()) throw InvalidArgument("frequency_sweep: empty frequency list");
  if (spec.methods.empty()) throw InvalidArgument("frequency_sweep: empty method list");
  const std::size_t nm = spec.methods.size();
  std::vector<SweepRow> rows(spec.frequencies.size() * nm);
  parallel_for(rows.size(), spec.threads, [&](std::size_t i) {
    rows[i] = sweep_point(p, spec.frequencies[i / nm], spec.methods[i % nm], spec);
  });
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, const SweepSpec& spec) {
  const bool with_error = spec.wants(Quantity::HcurlError);
  os << kSweepSchema << '\n';
  os << "f_hz,method,cond_estimate,cond_method,delta_D,rel_residual,n_dofs,wall_ms";
  if (with_error) os << ",hcurl_error";
  os << '\n';
  for (const auto& r : rows) {
    os << format_number(r.f_hz) << ',' << to_string(r.method) << ',';
    if (!r.failure.empty()) {
      os << r.failure << ",-," << r.failure << ',' << r.failure << ',' << r.n_dofs << ',';
    } else {
      if (r.condition) {
        os << (r.condition->singular ? std::string("singular") : format_number(r.condition->value)) << ','
           << to_string(r.condition->method) << ',';
      } else {
        os << "-,-,";
      }
      if (r.singular) os << "singular,singular,";
      else
        os << (spec.wants(Quantity::DeltaD) ? format_number(r.delta_D) : "-") << ','
           << (spec.wants(Quantity::SolveResidual) ? format_number(r.rel_residual) : "-") << ',';
      os << r.n_dofs << ',';
    }
    os << (spec.timing ? format_number(r.wall_ms) : "-");
    if (with_error) os << ',' << (r.hcurl_error ? format_number(*r.hcurl_error) : "-");
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Convergence

struct ConvergenceRow {
  int s_h = 0;
  Method method = Method::TreeCotree;
  std::optional<double> error;  // empty when the solve was singular
  std::optional<double> rate;   // against the previous successful refinement
};

inline constexpr const char* kConvergenceSchema = "# twostep converge v1";

/// H(curl) errors over uniform refinements of a manufactured-solution spec.
inline std::vector<ConvergenceRow> convergence_study(const ProblemSpec& base, const std::vector<int>& subdivisions,
                                                     double f_hz, const std::vector<Method>& methods) {
  if (base.source != SourceKind::Manufactured) throw InvalidArgument("convergence_study: needs a manufactured source");
  if (subdivisions.empty()) throw InvalidArgument("convergence_study: empty subdivision list");
  std::vector<ConvergenceRow> rows;
  for (auto m : methods) {
    int prev_s = 0;  // 0: no previous successful refinement
    double prev_err = 0.0;
    for (int s : subdivisions) {
      ProblemSpec spec = base;
      spec.subdivisions = {s, s, s};
      const auto p = build_problem(spec);
      ConvergenceRow row;
      row.s_h = s;
      row.method = m;
      try {
        const auto sol = run_two_step(p, FrequencyPoint::hz(f_hz), m);
        row.error = hcurl_error(p, sol.a, *p.manufactured);
        if (prev_s > 0) row.rate = std::log(prev_err / *row.error) / std::log(static_cast<double>(s) / prev_s);
        prev_s = s;
        prev_err = *row.error;
      } catch (const SingularMatrix&) {
        prev_s = 0;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

inline void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << kConvergenceSchema << '\n' << "s_h,method,hcurl_error,rate\n";
  for (const auto& r : rows) {
    os << r.s_h << ',' << to_string(r.method) << ',' << (r.error ? format_number(*r.error) : "singular") << ','
       << (r.rate ? format_number(*r.rate) : (r.error ? "-" : "singular")) << '\n';
  }
}

/// A study "passes" a rate threshold when every refinement step met it.
inline bool all_rates_at_least(const std::vector<ConvergenceRow>& rows, Method m, double threshold) {
  bool any = false;
  for (const auto& r : rows) {
    if (r.method != m) continue;
    if (!r.error) return false;
    if (r.rate) {
      any = true;
      if (*r.rate < threshold) return false;
    }
  }
  return any;
}

// ---------------------------------------------------------------------------
// Structural invariants

struct InvariantResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline double max_abs(const RealSparse& a) {
  double m = 0.0;
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (RealSparse::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

inline double symmetry_defect(const RealSparse& a) {
  const double m = max_abs(a);
  if (m == 0.0) return 0.0;
  const RealSparse d = a - RealSparse(a.transpose());
  return max_abs(d) / m;
}

/// Number of singular values above rtol * sigma_max.
inline Eigen::Index numerical_rank(const Eigen::MatrixXcd& a, double rtol = 1e-9) {
  if (a.size() == 0) return 0;
  const auto s = singular_values(a);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rtol * s[0]) ++r;
  return r;
}

inline constexpr std::size_t kDenseInvariantLimit = 2000;

inline std::vector<InvariantResult> check_invariants(const Problem& p) {
  std::vector<InvariantResult> out;
  const auto& b = p.bundle;
  auto add = [&](std::string name, double value, double tol, bool pass) {
    out.push_back({std::move(name), value, tol, pass});
  };
  auto add_le = [&](std::string name, double value, double tol) { add(std::move(name), value, tol, value <= tol); };

  {
    const RealSparse cp = b.C_nu * b.P;
    const double scale = std::max(1.0, max_abs(b.C_nu));
    add_le("curl_curl_times_gradient_is_zero", max_abs(cp) / scale, 1e-12);
  }
  add_le("K_sigma_symmetric", symmetry_defect(b.K_sigma), 1e-13);
  add_le("K_eps_symmetric", symmetry_defect(b.K_eps), 1e-13);
  add_le("M_sigma_symmetric", symmetry_defect(b.M_sigma), 1e-13);
  add_le("M_eps_symmetric", symmetry_defect(b.M_eps), 1e-13);
  add_le("C_nu_symmetric", symmetry_defect(b.C_nu), 1e-13);

  {
    // M_sigma vanishes on rows/columns of edges that touch no conductor cell,
    // K_sigma on rows/columns of nodes that touch none.
    double worst = 0.0;
    const auto& free_edges = p.edge.dofs.free_entities();
    for (Eigen::Index k = 0; k < b.M_sigma.outerSize(); ++k)
      for (RealSparse::InnerIterator it(b.M_sigma, k); it; ++it)
        if (!p.regions.edge_conductor[free_edges[static_cast<std::size_t>(it.row())]] ||
            !p.regions.edge_conductor[free_edges[static_cast<std::size_t>(it.col())]])
          worst = std::max(worst, std::abs(it.value()));
    const auto& free_nodes = p.scalar.dofs.free_entities();
    for (Eigen::Index k = 0; k < b.K_sigma.outerSize(); ++k)
      for (RealSparse::InnerIterator it(b.K_sigma, k); it; ++it)
        if (!p.regions.node_conductor[free_nodes[static_cast<std::size_t>(it.row())]] ||
            !p.regions.node_conductor[free_nodes[static_cast<std::size_t>(it.col())]])
          worst = std::max(worst, std::abs(it.value()));
    add_le("sigma_blocks_vanish_outside_conductor", worst, 0.0);
  }

  add("gauge_rows_equal_tree_edges", static_cast<double>(b.n_gauge()), static_cast<double>(p.partition.num_tree()),
      b.n_gauge() == p.partition.num_tree());

  if (b.n_w() <= kDenseInvariantLimit) {
    const Eigen::MatrixXcd c = Eigen::MatrixXd(b.C_nu).cast<cplx>();
    const auto kernel = static_cast<Eigen::Index>(b.n_w()) - numerical_rank(c);
    add("curl_curl_kernel_equals_tree_edges", static_cast<double>(kernel), static_cast<double>(p.partition.num_tree()),
        static_cast<std::size_t>(kernel) == p.partition.num_tree());

    const Eigen::MatrixXcd w = Eigen::MatrixXcd(reorder(build_curl_matrix(b, 0.0), p.partition));
    const auto nr = static_cast<Eigen::Index>(p.partition.num_cotree());
    const auto rank_rr = numerical_rank(w.topLeftCorner(nr, nr));
    add("cotree_block_full_rank_at_zero_frequency", static_cast<double>(rank_rr), static_cast<double>(nr), rank_rr == nr);
  }
  return out;
}

}  // namespace twostep
