// End-to-end tests of the command-line interface: these exercise the shipped
// binary through the shell the way a user would.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ifdm/io.hpp"

using namespace ifdm;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() / "ifdm_cli_tests";
  fs::create_directories(dir);
  const fs::path log = dir / ("out" + std::to_string(counter++) + ".log");
  const std::string cmd = (env.empty() ? "" : env + " ") +
                          std::string(IFDM_CLI_PATH) + " " + args + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ifdm_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.toml";
  std::ofstream out(p);
  out << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("forward run on the constant scenario is an exact fixed point") {
  const fs::path dir = fresh_dir("fwd_constant");
  const std::string cfg = write_config(dir,
      "[grid]\nn = 8\n[time]\nT = 0.02\ndt = 0.005\n"
      "[scenario]\nname = \"constant\"\n"
      "[io]\noutput_dir = \"" + (dir / "out").string() + "\"\n");
  const RunResult r = run_cli("forward --config " + cfg);
  REQUIRE(r.exit_code == 0);

  const LoadedField first = read_field((dir / "out/snap_000000_v.ifdm").string());
  REQUIRE(fs::exists(dir / "out/snap_000004_v.ifdm"));
  const LoadedField last = read_field((dir / "out/snap_000004_v.ifdm").string());
  CHECK(first.field.data == last.field.data);

  // diagnostics carry a header row
  std::ifstream diag(dir / "out/diagnostics.csv");
  std::string header;
  REQUIRE(std::getline(diag, header));
  CHECK(header.find("energy") != std::string::npos);
}

TEST_CASE("forward runs are bitwise deterministic") {
  const fs::path dir1 = fresh_dir("fwd_det1");
  const fs::path dir2 = fresh_dir("fwd_det2");
  auto config_for = [](const fs::path& dir) {
    return write_config(dir,
        "[grid]\nn = 8\n[time]\nT = 0.01\ndt = 0.0025\n"
        "[scenario]\nname = \"random_smooth\"\nseed = 7\n"
        "[io]\noutput_dir = \"" + (dir / "out").string() + "\"\n");
  };
  REQUIRE(run_cli("forward --config " + config_for(dir1)).exit_code == 0);
  REQUIRE(run_cli("forward --config " + config_for(dir2)).exit_code == 0);
  for (const char* f : {"snap_000004_v.ifdm", "snap_000004_alpha.ifdm"}) {
    const Field a = read_field((dir1 / "out" / f).string()).field;
    const Field b = read_field((dir2 / "out" / f).string()).field;
    CHECK(a.data == b.data);
  }
}

TEST_CASE("dual run on the exact constant base converges at once") {
  const fs::path dir = fresh_dir("dual_constant");
  const std::string cfg = write_config(dir,
      "[grid]\nn = 4\n[time]\nT = 0.5\nnt = 4\n"
      "[scenario]\nname = \"constant\"\n"
      "[io]\noutput_dir = \"" + (dir / "out").string() + "\"\n");
  const RunResult r = run_cli("dual --config " + cfg);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("converged") != std::string::npos);

  // report.csv: header plus the iteration-zero row with tiny gradient
  std::ifstream rep(dir / "out/report.csv");
  std::string header, row;
  REQUIRE(std::getline(rep, header));
  CHECK(header == "iter,S,grad_norm,min_pivot,step_length");
  REQUIRE(std::getline(rep, row));
  {
    std::size_t pos = 0;
    for (int c = 0; c < 2; ++c) pos = row.find(',', pos) + 1;
    const double grad0 = std::stod(row.substr(pos, row.find(',', pos) - pos));
    CHECK(grad0 <= 1e-13);  // exact base: already critical at D = 0
  }

  CHECK(fs::exists(dir / "out/dstar_0_lambda.ifdm"));
  CHECK(fs::exists(dir / "out/uhat_0_v.ifdm"));
}

TEST_CASE("dual run on a perturbed base ascends monotonically") {
  const fs::path dir = fresh_dir("dual_perturbed");
  const std::string cfg = write_config(dir,
      "[grid]\nn = 4\n[time]\nT = 0.25\nnt = 4\n"
      "[dual]\nbase_perturb = 0.001\nmax_iter = 40\n"
      "[scenario]\nname = \"beltrami_alfven\"\nseed = 3\n"
      "[io]\noutput_dir = \"" + (dir / "out").string() + "\"\n");
  const RunResult r = run_cli("dual --config " + cfg);
  REQUIRE(r.exit_code == 0);

  std::ifstream rep(dir / "out/report.csv");
  std::string line;
  REQUIRE(std::getline(rep, line));  // header
  double prev = -std::numeric_limits<double>::infinity();
  int rows = 0;
  while (std::getline(rep, line)) {
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 + 1);
    const double S = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(S >= prev - 1e-15);
    prev = S;
    ++rows;
  }
  CHECK(rows >= 2);
}

TEST_CASE("missing base snapshots exit with code 2 and name the path") {
  const fs::path dir = fresh_dir("dual_missing");
  const std::string cfg = write_config(dir,
      "[grid]\nn = 4\n[time]\nT = 0.25\nnt = 4\n"
      "[scenario]\nname = \"from_file\"\nfile = \"" + (dir / "nobase").string() +
      "\"\n[io]\noutput_dir = \"" + (dir / "out").string() + "\"\n");
  const RunResult r = run_cli("dual --config " + cfg);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("nobase") != std::string::npos);
}

TEST_CASE("config errors exit with code 2 and a line number") {
  const fs::path dir = fresh_dir("bad_config");
  const std::string cfg = write_config(dir, "[grid]\nn = 3\n");
  const RunResult r = run_cli("forward --config " + cfg);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("line 2") != std::string::npos);
}

TEST_CASE("check suites pass on a healthy build") {
  for (const char* suite : {"operators", "algebra", "mapping"}) {
    const RunResult r = run_cli(std::string("check --suite ") + suite);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("[FAIL]") == std::string::npos);
  }
}

TEST_CASE("fault injection makes the suites fail with a named invariant") {
  const RunResult algebra = run_cli("check --suite algebra --inject-fault b-table");
  CHECK(algebra.exit_code != 0);
  CHECK(algebra.output.find("[FAIL] packed-vs-direct Lagrangian") != std::string::npos);

  const RunResult dual = run_cli("check --suite dual --inject-fault b-table");
  CHECK(dual.exit_code != 0);
  CHECK(dual.output.find("[FAIL]") != std::string::npos);
  CHECK(dual.output.find("weak-form primal residual") != std::string::npos);
}

TEST_CASE("forward Alfven run keeps the helicity column constant") {
  const fs::path dir = fresh_dir("fwd_alfven");
  const std::string cfg = write_config(dir,
      "[grid]\nn = 16\n[time]\nT = 0.25\ndt = 0.0125\n"
      "[forward]\nsample_every = 5\n"
      "[scenario]\nname = \"beltrami_alfven\"\n"
      "[io]\noutput_dir = \"" + (dir / "out").string() + "\"\n");
  REQUIRE(run_cli("forward --config " + cfg).exit_code == 0);

  std::ifstream diag(dir / "out/diagnostics.csv");
  std::string line;
  REQUIRE(std::getline(diag, line));  // header
  std::vector<double> total;
  while (std::getline(diag, line)) {
    // helicity_total is column 6 (0-based 5)
    std::size_t pos = 0;
    for (int c = 0; c < 5; ++c) pos = line.find(',', pos) + 1;
    total.push_back(std::stod(line.substr(pos, line.find(',', pos) - pos)));
  }
  REQUIRE(total.size() >= 4);
  for (double h : total)
    CHECK(std::abs(h - total.front()) <= 1e-6 * std::abs(total.front()));
}

TEST_CASE("CFL violation aborts with exit code 3") {
  const fs::path dir = fresh_dir("fwd_cfl");
  const std::string cfg = write_config(dir,
      "[grid]\nn = 8\n[time]\nT = 0.4\ndt = 0.1\n"  // dt*|v|*n = 0.8 > 0.5
      "[scenario]\nname = \"constant\"\n"
      "[io]\noutput_dir = \"" + (dir / "out").string() + "\"\n");
  const RunResult r = run_cli("forward --config " + cfg);
  CHECK(r.exit_code == 3);
}

TEST_CASE("dual solve against a stored forward trajectory") {
  const fs::path dir = fresh_dir("dual_from_file");
  const std::string fwd_cfg = write_config(dir,
      "[grid]\nn = 8\n[time]\nT = 0.5\ndt = 0.03125\n"
      "[forward]\nsample_every = 4\n"
      "[scenario]\nname = \"constant\"\n"
      "[io]\noutput_dir = \"" + (dir / "base").string() + "\"\n");
  REQUIRE(run_cli("forward --config " + fwd_cfg).exit_code == 0);
  REQUIRE(fs::exists(dir / "base/snap_000004_v.ifdm"));

  const fs::path cfg2 = dir / "dual.toml";
  {
    std::ofstream out(cfg2);
    out << "[grid]\nn = 8\n[time]\nT = 0.5\nnt = 4\n"
        << "[scenario]\nname = \"from_file\"\nfile = \"" << (dir / "base").string()
        << "\"\n[io]\noutput_dir = \"" << (dir / "out").string() << "\"\n";
  }
  const RunResult r = run_cli("dual --config " + cfg2.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("converged") != std::string::npos);
}

TEST_CASE("worker count does not change results") {
  const fs::path dir1 = fresh_dir("threads1");
  const fs::path dir4 = fresh_dir("threads4");
  auto config_for = [](const fs::path& dir) {
    return write_config(dir,
        "[grid]\nn = 8\n[time]\nT = 0.25\nnt = 4\n"
        "[dual]\nbase_perturb = 0.001\nd0_scale = 0.001\nmax_iter = 12\n"
        "[scenario]\nname = \"beltrami_alfven\"\nseed = 5\n"
        "[io]\noutput_dir = \"" + (dir / "out").string() + "\"\n");
  };
  const std::string cfg1 = config_for(dir1);
  const std::string cfg4 = config_for(dir4);
  REQUIRE(run_cli("dual --config " + cfg1, "IFDM_THREADS=1").exit_code == 0);
  REQUIRE(run_cli("dual --config " + cfg4, "IFDM_THREADS=4").exit_code == 0);
  CHECK(slurp(dir1 / "out/report.csv") == slurp(dir4 / "out/report.csv"));
  for (const char* f : {"uhat_0_v.ifdm", "uhat_3_alpha.ifdm", "dstar_0_lambda.ifdm"}) {
    const Field a = read_field((dir1 / "out" / f).string()).field;
    const Field b = read_field((dir4 / "out" / f).string()).field;
    CHECK(a.data == b.data);
  }
}

TEST_CASE("the full check suite passes in one run") {
  const RunResult r = run_cli("check --suite all");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("[FAIL]") == std::string::npos);
}

TEST_CASE("dump-tables writes the audit CSVs") {
  const fs::path dir = fresh_dir("tables");
  const RunResult r = run_cli("dump-tables --out " + (dir / "t").string());
  REQUIRE(r.exit_code == 0);
  const std::string m = slurp(dir / "t/M.csv");
  CHECK(m.find("I,Gamma,value") == 0);
  int lines = 0;
  for (char c : m)
    if (c == '\n') ++lines;
  CHECK(lines == 19);  // header + 18 nonzeros
  const std::string b = slurp(dir / "t/B.csv");
  CHECK(b.find("Gamma,J,K,value") == 0);
}
