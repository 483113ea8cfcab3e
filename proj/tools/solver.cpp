// Command-line front end: sweep, converge, solve, check.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "twostep/scenario.hpp"
#include "twostep/study.hpp"
#include "twostep/vtk.hpp"

namespace {

using namespace twostep;

enum Exit { kOk = 0, kConfig = 2, kSingular = 3, kIo = 4 };

std::vector<std::string> split_list(const std::string& s) { return detail::split(s, ", \t"); }

// "0,1e-6,1" or "logspace:1e-6:1e12:19", optionally "0,logspace:..." mixed.
std::vector<double> parse_frequencies(const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : split_list(text)) {
    if (tok.rfind("logspace:", 0) == 0) {
      const auto parts = detail::split(tok.substr(9), ":");
      if (parts.size() != 3) throw ConfigError(0, "logspace needs lo:hi:count");
      const auto v = logspace(detail::parse_number(parts[0], 0), detail::parse_number(parts[1], 0),
                              detail::parse_int(parts[2], 0));
      out.insert(out.end(), v.begin(), v.end());
    } else {
      out.push_back(detail::parse_number(tok, 0));
    }
  }
  if (out.empty()) throw ConfigError(0, "empty frequency list");
  for (double f : out)
    if (!(f >= 0.0)) throw ConfigError(0, "frequencies must be non-negative");
  return out;
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> out;
  for (const auto& tok : split_list(text)) out.push_back(parse_method(tok));
  return out;
}

template <class Writer>
void write_output(const std::string& path, Writer&& w) {
  if (path.empty() || path == "-") {
    w(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path + "'");
  w(os);
  if (!os) throw IoError("write failed for '" + path + "'");
}

struct Options {
  std::string config;
  std::string freqs = "0,1e-6,1e-3,1,1e3,1e6";
  std::string methods;
  std::string out;
  std::string require;
  std::string quantities;
  bool timing = false;
  unsigned threads = 1;
  std::string subdivs = "2,4,8";
  double freq = 0.0;
  std::string method = "tree-cotree";
  std::string vtk;
  std::string tree;
  int refine = 1;
};

int run_sweep(const Options& o) {
  const auto sc = load_scenario(o.config);
  SweepSpec spec;
  spec.frequencies = parse_frequencies(o.freqs);
  spec.methods = o.methods.empty() ? sc.methods : parse_methods(o.methods);
  if (!o.quantities.empty()) {
    spec.quantities.clear();
    for (const auto& q : split_list(o.quantities)) spec.quantities.push_back(parse_quantity(q));
  }
  spec.timing = o.timing;
  spec.threads = o.threads;
  const auto required = o.require.empty() ? std::vector<Method>{} : parse_methods(o.require);
  const auto p = build_problem(sc.problem);
  const auto rows = frequency_sweep(p, spec);
  write_output(o.out, [&](std::ostream& os) { write_sweep_csv(os, rows, spec); });
  for (const auto& r : rows)
    if ((r.singular || r.failure == "singular") &&
        std::find(required.begin(), required.end(), r.method) != required.end()) {
      std::fprintf(stderr, "singular matrix for required method %s at f = %g Hz\n",
                   std::string(to_string(r.method)).c_str(), r.f_hz);
      return kSingular;
    }
  return kOk;
}

int run_converge(const Options& o) {
  const auto sc = load_scenario(o.config);
  std::vector<int> subdivs;
  for (const auto& t : split_list(o.subdivs)) subdivs.push_back(detail::parse_int(t, 0));
  const auto methods = o.methods.empty() ? sc.methods : parse_methods(o.methods);
  const auto required = o.require.empty() ? std::vector<Method>{} : parse_methods(o.require);
  const auto rows = convergence_study(sc.problem, subdivs, o.freq, methods);
  write_output(o.out, [&](std::ostream& os) { write_convergence_csv(os, rows); });
  for (const auto& r : rows)
    if (!r.error && std::find(required.begin(), required.end(), r.method) != required.end()) return kSingular;
  return kOk;
}

int run_solve(const Options& o) {
  const auto sc = load_scenario(o.config);
  const auto method = parse_method(o.method);
  const auto p = build_problem(sc.problem);
  if (!o.tree.empty()) {
    write_output(o.tree, [&](std::ostream& os) { write_tree(os, p.edge, p.partition); });
  }
  const auto f = FrequencyPoint::hz(o.freq);
  Solution sol;
  try {
    sol = run_two_step(p, f, method);
  } catch (const SingularMatrix& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kSingular;
  } catch (const StaticSingularity& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kSingular;
  }
  const double dd = gauge_residual(p.bundle, f.omega(), sol.a);
  std::printf("f_hz=%.6e method=%s n_v=%zu n_w=%zu curl_dofs=%zu eqs_residual=%.6e curl_residual=%.6e delta_D=%.6e |a|=%.6e\n",
              f.f_hz, std::string(to_string(method)).c_str(), p.bundle.n_v(), p.bundle.n_w(), sol.curl_dofs,
              sol.eqs_residual, sol.curl_residual, dd, sol.a.norm());
  if (p.manufactured) std::printf("hcurl_error=%.6e\n", hcurl_error(p, sol.a, *p.manufactured));
  if (!o.vtk.empty()) {
    const DerivedFields fields(p, sol);
    export_vtk(o.vtk, *p.mesh, &fields, o.refine);
  }
  return kOk;
}

int run_check(const Options& o) {
  const auto sc = load_scenario(o.config);
  const auto p = build_problem(sc.problem);
  bool ok = true;
  for (const auto& r : check_invariants(p)) {
    std::printf("%s %s value=%.3e tol=%.3e\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.value, r.tolerance);
    ok = ok && r.pass;
  }
  return ok ? kOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-step potential formulation solver with tree-cotree low-frequency stabilization"};
  app.require_subcommand(1);
  Options o;

  auto* sweep = app.add_subcommand("sweep", "condition / gauge residual / solve residual over frequency");
  sweep->add_option("--config", o.config, "scenario file")->required();
  sweep->add_option("--freqs", o.freqs, "comma list, entries may be logspace:lo:hi:count");
  sweep->add_option("--methods", o.methods, "comma list of original, tree-cotree, lagrange");
  sweep->add_option("--quantities", o.quantities, "condition, delta_D, solve_residual, hcurl_error");
  sweep->add_option("--out", o.out, "CSV output (default stdout)");
  sweep->add_option("--require", o.require, "methods whose singularity fails the run (exit 3)");
  sweep->add_option("--threads", o.threads, "worker threads");
  sweep->add_flag("--timing", o.timing, "fill wall_ms (output is then not byte-reproducible)");

  auto* converge = app.add_subcommand("converge", "H(curl) error over mesh refinement");
  converge->add_option("--config", o.config, "manufactured-solution scenario file")->required();
  converge->add_option("--subdivs", o.subdivs, "comma list of subdivisions per axis");
  converge->add_option("--freq", o.freq, "frequency in Hz")->required();
  converge->add_option("--methods", o.methods, "comma list of methods");
  converge->add_option("--require", o.require, "methods whose singularity fails the run (exit 3)");
  converge->add_option("--out", o.out, "CSV output (default stdout)");

  auto* solve = app.add_subcommand("solve", "single two-step solve with optional VTK export");
  solve->add_option("--config", o.config, "scenario file")->required();
  solve->add_option("--freq", o.freq, "frequency in Hz")->required();
  solve->add_option("--method", o.method, "original, tree-cotree or lagrange");
  solve->add_option("--vtk", o.vtk, "legacy VTK output file");
  solve->add_option("--refine", o.refine, "VTK samples per cell edge");
  solve->add_option("--tree", o.tree, "dump tree edges as 'nodeA nodeB edgeId' lines");

  auto* check = app.add_subcommand("check", "structural invariant suite");
  check->add_option("--config", o.config, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (sweep->parsed()) return run_sweep(o);
    if (converge->parsed()) return run_converge(o);
    if (solve->parsed()) return run_solve(o);
    if (check->parsed()) return run_check(o);
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIo;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const SingularMatrix& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kSingular;
  } catch (const StaticSingularity& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kSingular;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  }
  return kOk;
}
