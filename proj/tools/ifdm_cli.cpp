// Command-line driver: forward runs to manufacture base states, dual solves,
// invariant check suites, and coupling-table dumps.
//
// Exit codes: 0 success, 2 configuration/file errors, 3 numerical abort.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ifdm/ifdm.hpp"

namespace fs = std::filesystem;
using namespace ifdm;

namespace {

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string snap_stem(const std::string& dir, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06d", index);
  return dir + "/" + buf;
}

void write_state(const std::string& stem, const PrimalState& s, Real t) {
  write_field(stem + "_v.ifdm", "v", s.v, t);
  write_field(stem + "_alpha.ifdm", "alpha", s.alpha, t);
  write_field(stem + "_p.ifdm", "p", s.p, t);
}

PrimalState read_state(const std::string& stem) {
  PrimalState s;
  s.v = read_field(stem + "_v.ifdm").field;
  s.alpha = read_field(stem + "_alpha.ifdm").field;
  s.p = read_field(stem + "_p.ifdm").field;
  if (s.v.comps != 3 || s.alpha.comps != 9 || s.p.comps != 1)
    throw IoError("snapshot " + stem + " has wrong component counts");
  return s;
}

PrimalState initial_state(const RunConfig& cfg) {
  const PeriodicGrid g(cfg.n);
  if (cfg.scenario == "from_file") return read_state(cfg.file);
  return make_scenario(cfg.scenario, g, cfg.seed);
}

int cmd_forward(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  fs::create_directories(cfg.output_dir);

  PrimalState state0 = initial_state(cfg);
  IntegratorConfig icfg;
  icfg.dt = cfg.dt;
  icfg.steps = cfg.forward_steps();
  icfg.nu = cfg.nu;
  icfg.eta = cfg.eta;
  icfg.dealias = cfg.dealias;

  const Trajectory traj = integrate(state0, icfg, cfg.sample_every);

  CsvWriter csv(cfg.output_dir + "/diagnostics.csv",
                {"t", "energy", "helicity_row1", "helicity_row2", "helicity_row3",
                 "helicity_total", "div_v_max", "div_alpha_max"});
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    write_state(snap_stem(cfg.output_dir, static_cast<int>(k)), traj.states[k],
                traj.times[k]);
    const ConservationReport& r = traj.reports[k];
    csv.row({r.time, r.energy, r.helicity_per_row[0], r.helicity_per_row[1],
             r.helicity_per_row[2], r.helicity_total, r.div_v_norm,
             r.div_alpha_norm});
  }
  std::cout << "forward: wrote " << traj.states.size() << " snapshots to "
            << cfg.output_dir << "\n";
  if (traj.aborted) {
    std::cerr << "forward: numerical abort: " << traj.abort_message
              << " (last good state saved)\n";
    return 3;
  }
  return 0;
}

int cmd_dual(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  fs::create_directories(cfg.output_dir);

  const PeriodicGrid g(cfg.n);
  const SpaceTimeLattice lat(g, cfg.nt, cfg.T);

  std::vector<PrimalState> nodal;
  Field v0, alpha0;
  if (cfg.scenario == "from_file") {
    for (int k = 0; k <= cfg.nt; ++k) {
      const std::string stem = snap_stem(cfg.file, k);
      if (!fs::exists(stem + "_v.ifdm"))
        throw IoError("missing base snapshot " + stem + "_v.ifdm");
      nodal.push_back(read_state(stem));
    }
    v0 = nodal.front().v;
    alpha0 = nodal.front().alpha;
  } else {
    PrimalState exact = make_scenario(cfg.scenario, g, cfg.seed);
    v0 = exact.v;
    alpha0 = exact.alpha;
    PrimalState base = exact;
    if (cfg.base_perturb > 0.0)
      base = perturb_state(exact, cfg.seed, cfg.base_perturb);
    nodal.assign(cfg.nt + 1, base);
  }

  DualProblem prob(lat, cfg.backend, cfg.aux(), base_from_nodal_states(nodal),
                   v0, alpha0);
  DualState d0 = cfg.d0_scale > 0.0
                     ? random_dual_state(lat, cfg.seed, cfg.d0_scale)
                     : DualState(lat);

  DualSolveOptions opt;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  const DualProblem::MaximizeResult res = prob.maximize(d0, opt);
  const SolveReport& rep = res.report;

  CsvWriter csv(cfg.output_dir + "/report.csv",
                {"iter", "S", "grad_norm", "min_pivot", "step_length"});
  for (std::size_t i = 0; i < rep.S_history.size(); ++i)
    csv.row({static_cast<Real>(i), rep.S_history[i], rep.grad_norm_history[i],
             rep.min_pivot_history[i], rep.step_history[i]});

  std::cout << "dual: " << to_string(rep.status) << " after " << rep.iterations
            << " iterations, wall " << rep.wall_time_s << " s\n";
  if (rep.status == LbfgsStatus::initial_point_infeasible) {
    std::cerr << "dual: mapping failure at the starting dual state\n";
    return 3;
  }

  for (int l = 0; l <= cfg.nt; ++l) {
    const std::string stem = cfg.output_dir + "/dstar_" + std::to_string(l);
    const Real t = l * lat.dt();
    write_field(stem + "_lambda.ifdm", "lambda", res.d_star.lambda[l], t);
    write_field(stem + "_A.ifdm", "A", res.d_star.A[l], t);
    write_field(stem + "_mu.ifdm", "mu", res.d_star.mu[l], t);
  }
  const std::vector<PrimalState> series = prob.extract_primal(res.d_star);
  for (int k = 0; k < cfg.nt; ++k) {
    const Real t = (k + 0.5) * lat.dt();
    write_state(cfg.output_dir + "/uhat_" + std::to_string(k), series[k], t);
  }
  std::cout << "dual: wrote report.csv, dual fields, and mapped primal series to "
            << cfg.output_dir << "\n";
  return 0;
}

int cmd_check(const std::string& suite, const std::string& fault) {
  FaultInjection fi = FaultInjection::none;
  if (fault == "b-table") fi = FaultInjection::corrupt_b_table;
  else if (!fault.empty() && fault != "none")
    throw ArgumentError("unknown fault injection '" + fault + "'");

  const std::vector<CheckResult> results = run_check_suite(suite, fi);
  int failures = 0;
  for (const CheckResult& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
    if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
    std::cout << "\n";
    if (!r.pass) ++failures;
  }
  std::cout << results.size() - failures << "/" << results.size() << " checks passed\n";
  return failures == 0 ? 0 : 1;
}

int cmd_dump_tables(const std::string& dir) {
  fs::create_directories(dir);
  const OperatorTables& t = operator_tables();
  {
    CsvWriter csv(dir + "/M.csv", {"I", "Gamma", "value"});
    for (const MEntry& e : t.M)
      csv.row({static_cast<Real>(e.u), static_cast<Real>(e.d), e.value});
  }
  {
    CsvWriter csv(dir + "/B.csv", {"Gamma", "J", "K", "value"});
    for (const BEntry& e : t.B)
      csv.row({static_cast<Real>(e.d), static_cast<Real>(e.j),
               static_cast<Real>(e.k), e.value});
  }
  std::cout << "dump-tables: wrote " << t.M.size() << " M entries and "
            << t.B.size() << " B entries to " << dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ideal-FDM / ideal-MHD dual variational toolkit"};
  app.require_subcommand(1);

  std::string config_path, suite = "all", fault, out_dir = "tables";

  CLI::App* fwd = app.add_subcommand("forward", "integrate a forward trajectory");
  fwd->add_option("--config", config_path, "TOML config file")->required();

  CLI::App* dual = app.add_subcommand("dual", "maximize the dual functional");
  dual->add_option("--config", config_path, "TOML config file")->required();

  CLI::App* check = app.add_subcommand("check", "run invariant suites");
  check->add_option("--suite", suite,
                    "operators | algebra | mapping | dual | all");
  check->add_option("--inject-fault", fault,
                    "test hook: none | b-table")
      ->group("");  // hidden

  CLI::App* dump = app.add_subcommand("dump-tables", "dump coupling tables as CSV");
  dump->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fwd->parsed()) return cmd_forward(config_path);
    if (dual->parsed()) return cmd_dual(config_path);
    if (check->parsed()) return cmd_check(suite, fault);
    if (dump->parsed()) return cmd_dump_tables(out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const StepSizeError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
