#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "phnet/benchmarks.hpp"
#include "phnet/checks.hpp"
#include "phnet/io.hpp"

namespace fs = std::filesystem;
using namespace phnet;

namespace {

constexpr int kUsage = 2;
constexpr int kNumerical = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Scenario load(const std::string& path) {
  std::vector<std::string> warnings;
  Scenario sc;
  try {
    sc = load_scenario(path, &warnings);
  } catch (const SchemaError& ex) {
    throw UsageError(path + ": " + ex.what());
  } catch (const Error& ex) {
    throw UsageError(ex.what());
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return sc;
}

std::string out_dir(const Scenario& sc, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!sc.output.out_dir.empty()) return sc.output.out_dir;
  return "out/" + (sc.name.empty() ? std::string("run") : sc.name);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  return os;
}

std::string probe_file(const Probe& p, std::size_t i) {
  std::ostringstream os;
  os << "probe_" << i << "_" << p.edge << "_" << format_double(p.x) << ".csv";
  return os.str();
}

int cmd_simulate(const std::string& path, const std::string& out_flag) {
  const Scenario sc = load(path);
  const Model model = build_model(sc);
  const fs::path dir = out_dir(sc, out_flag);
  fs::create_directories(dir);
  const auto probes = probe_points(*model.space, sc.output.probes);

  const int K = sc.num_steps();
  const int every = std::max(1, K / 20);
  SimulateOptions opts;
  opts.observer = [&](const StepEvent& ev) {
    if (ev.k > 0 && (ev.k % every == 0 || ev.k == K))
      std::cerr << "  step " << ev.k << "/" << K << "  t = " << ev.t << "  H = " << ev.diag->hamiltonian
                << "  newton " << ev.diag->newton_iters << "\n";
  };
  const Trajectory tr = simulate(model, sc, opts);

  {
    auto os = open_out(dir / "diagnostics.csv");
    write_diagnostics_csv(os, tr.diagnostics);
  }
  for (std::size_t i = 0; i < probes.size(); ++i) {
    auto os = open_out(dir / probe_file(sc.output.probes[i], i));
    write_probe_csv(os, model, tr, probes[i]);
  }
  {
    auto os = open_out(dir / "ports.csv");
    write_ports_csv(os, model, tr);
  }
  {
    auto os = open_out(dir / "final_state.csv");
    write_state_csv(os, model, tr.final_state);
  }

  double min_slack = std::numeric_limits<double>::infinity(), max_mass = 0.0, max_local = 0.0, max_junction = 0.0;
  int spd = 0;
  for (const auto& d : tr.diagnostics) {
    min_slack = std::min(min_slack, d.dissipation_slack);
    max_mass = std::max(max_mass, d.mass_residual);
    max_local = std::max(max_local, d.local_residual);
    max_junction = std::max(max_junction, d.junction_flux);
    spd += d.spd_violations;
  }
  const double H0 = tr.initial.hamiltonian, HT = tr.diagnostics.back().hamiltonian;
  json meta = run_metadata(sc, model);
  meta["run"] = {{"scenario_file", path},
                 {"runtime_s", tr.runtime_s},
                 {"steps", tr.diagnostics.size()},
                 {"max_newton_iters", tr.max_newton_iters},
                 {"H0", H0},
                 {"HT", HT},
                 {"energy_loss", 1.0 - HT / H0},
                 {"min_dissipation_slack", min_slack},
                 {"max_mass_residual", max_mass},
                 {"max_local_residual", max_local},
                 {"max_junction_flux", max_junction},
                 {"max_abs_rho", tr.max_abs_rho},
                 {"spd_violations", spd}};
  if (tr.steady)
    meta["run"]["steady_init"] = {{"strategy", to_string(tr.steady->strategy)},
                                  {"residual", tr.steady->residual},
                                  {"pseudo_steps", tr.steady->pseudo_steps},
                                  {"mass_anchor", tr.steady->mass_anchor}};
  save_json((dir / "metadata.json").string(), meta);

  std::printf("%s: %zu steps in %.2f s\n", sc.name.c_str(), tr.diagnostics.size(), tr.runtime_s);
  std::printf("  energy loss 1 - H(T)/H(0) = %.6g\n", 1.0 - HT / H0);
  std::printf("  min dissipation slack     = %.3e\n", min_slack);
  std::printf("  max mass residual         = %.3e\n", max_mass);
  std::printf("  max local residual        = %.3e\n", max_local);
  std::printf("  max Newton iterations     = %d\n", tr.max_newton_iters);
  std::printf("  output in %s\n", dir.string().c_str());
  return 0;
}

int cmd_steady(const std::string& path, const std::string& out_flag) {
  Scenario sc = load(path);
  const Model model = build_model(sc);
  const DiscreteOperators& ops = *model.ops;
  const double rho0 = reference_density(ops, model.bcs, 0.0, sc.initial.steady_rho_guess.value_or(sc.initial.rho_default));
  SteadyOptions so;
  so.newton = sc.newton;
  so.newton.max_iter = std::max(sc.newton.max_iter, 50);
  so.ptc_dt0 = sc.dt;
  const SteadyResult r = solve_steady(model.ops, model.bcs, 0.0, flat_state(ops, rho0), so);
  if (!r.converged) {
    std::cerr << "error: steady solve did not converge at t = 0 (" << r.stats.message << ")\n";
    return kNumerical;
  }
  const fs::path dir = out_dir(sc, out_flag);
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "steady.csv");
    write_state_csv(os, model, r.state);
  }
  std::printf("steady state for %s: strategy %s, residual %.3e\n", sc.name.c_str(), to_string(r.strategy).c_str(),
              r.residual);
  const auto& topo = model.space->topology();
  for (std::size_t i = 0; i < topo.num_ports(); ++i)
    std::printf("  port %-8s e = %.10g  f = %.10g\n", topo.node(topo.boundary_nodes()[i]).id.c_str(), r.state.e[i],
                r.f[i]);
  std::printf("  junction flux residual = %.3e\n", junction_flux_residual(*model.space, r.state.a2));
  std::printf("  output in %s\n", (dir / "steady.csv").string().c_str());
  return 0;
}

int cmd_check(const std::string& path) {
  const Scenario sc = load(path);
  const CheckReport rep = run_checks(sc);
  for (const auto& it : rep.items) {
    const char* status = !it.enforced ? "INFO" : it.passed ? "PASS" : "FAIL";
    std::printf("%-4s %-32s value %-12.4e", status, it.name.c_str(), it.value);
    if (it.enforced) std::printf(" tol %-10.3e", it.tol);
    if (!it.detail.empty()) std::printf(" (%s)", it.detail.c_str());
    std::printf("\n");
  }
  const bool ok = rep.all_passed();
  std::printf("%s\n", ok ? "all checks passed" : "some checks FAILED");
  return ok ? 0 : kNumerical;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + tok + "' in --dx");
    }
    if (!(out.back() > 0.0)) throw UsageError("--dx values must be positive");
  }
  return out;
}

int cmd_convergence(const std::string& path, const std::string& dx_list, double ref_dx, const std::string& subdomain,
                    unsigned threads) {
  const Scenario sc = load(path);
  const auto dxs = parse_list(dx_list);
  if (dxs.size() < 2) throw UsageError("--dx needs at least two values");
  // edge:<id>:<x0>:<x1>
  std::vector<std::string> parts;
  {
    std::stringstream ss(subdomain);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
  }
  if (parts.size() != 4 || parts[0] != "edge") throw UsageError("--subdomain expects edge:<id>:<x0>:<x1>");
  double x0, x1;
  try {
    x0 = std::stod(parts[2]);
    x1 = std::stod(parts[3]);
  } catch (const std::exception&) {
    throw UsageError("--subdomain bounds must be numbers");
  }
  if (!sc.network.find_edge(parts[1])) throw UsageError("--subdomain names unknown edge '" + parts[1] + "'");
  const ConvergenceResult r = convergence_study(sc, dxs, ref_dx, parts[1], x0, x1, threads);
  std::printf("L2 error of rho at T = %g on edge %s, [%g, %g), reference dx = %g\n", sc.t_end, parts[1].c_str(), x0,
              x1, ref_dx);
  std::printf("%12s %10s %22s\n", "dx", "elements", "error");
  for (const auto& row : r.rows) std::printf("%12g %10zu %22.15e\n", row.dx, row.num_elements, row.error);
  std::printf("estimated order %.4f (%s)\n", r.order,
              r.strictly_decreasing ? "errors strictly decreasing" : "errors NOT strictly decreasing");
  return 0;
}

int cmd_benchmark(const std::string& which, const std::string& dir) {
  try {
    for (const auto& f : write_benchmark(which, dir)) std::printf("wrote %s\n", f.c_str());
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& ex) {
    if (std::string(ex.what()).rfind("unknown benchmark", 0) == 0) throw UsageError(ex.what());
    throw;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving simulation of barotropic flow on pipe networks"};
  app.require_subcommand(1);

  std::string scenario, out, dx_list = "0.2,0.1,0.05", subdomain = "edge:w1:0:5", bench, bench_dir = "scenarios";
  double ref_dx = 0.0125;
  unsigned threads = 0;

  auto* sim = app.add_subcommand("simulate", "run a scenario and write CSV output");
  sim->add_option("scenario", scenario, "scenario file")->required();
  sim->add_option("--out", out, "output directory");

  auto* st = app.add_subcommand("steady", "steady state for the boundary data at t = 0");
  st->add_option("scenario", scenario, "scenario file")->required();
  st->add_option("--out", out, "output directory");

  auto* chk = app.add_subcommand("check", "run the invariant suite");
  chk->add_option("scenario", scenario, "scenario file")->required();

  auto* conv = app.add_subcommand("convergence", "mesh convergence of the density against a fine run");
  conv->add_option("scenario", scenario, "scenario file")->required();
  conv->add_option("--dx", dx_list, "comma-separated mesh caps")->capture_default_str();
  conv->add_option("--ref-dx", ref_dx, "mesh cap of the reference run")->capture_default_str()->check(CLI::PositiveNumber);
  conv->add_option("--subdomain", subdomain, "edge:<id>:<x0>:<x1>")->capture_default_str();
  conv->add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* bm = app.add_subcommand("benchmark", "write the shipped scenario files");
  bm->add_option("name", bench, "dam-break, pipeline, y-network, equilibrium or all")->required();
  bm->add_option("--dir", bench_dir, "target directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sim) return cmd_simulate(scenario, out);
    if (*st) return cmd_steady(scenario, out);
    if (*chk) return cmd_check(scenario);
    if (*conv) return cmd_convergence(scenario, dx_list, ref_dx, subdomain, threads);
    if (*bm) return cmd_benchmark(bench, bench_dir);
  } catch (const UsageError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kUsage;
  } catch (const StepFailure& ex) {
    std::cerr << "error: step failed at t_k = " << format_double(ex.t_k) << ": " << ex.what() << "\n";
    return kNumerical;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
