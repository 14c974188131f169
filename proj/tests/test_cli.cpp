// End-to-end tests of the kerrmode / fieldstate2csv binaries: exit codes,
// CSV/JSON outputs, cache behavior, determinism.  Paths to the tools come in
// through compile definitions so the tests run against the just-built binaries.
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "kerr/geometry.hpp"
#include "kerr/io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  REQUIRE(f.good());
}

// one scratch root per test binary run, fresh subdir per case
fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "kerr_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunResult run_cmd(const std::string& cmd, const fs::path& dir) {
  const std::string so = (dir / ".run_stdout").string();
  const std::string se = (dir / ".run_stderr").string();
  const int rc = std::system((cmd + " >" + so + " 2>" + se).c_str());
  RunResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(so);
  r.err = slurp(se);
  return r;
}

RunResult run_tool(const std::string& args, const fs::path& dir,
                   const std::string& env = "") {
  return run_cmd(env + (env.empty() ? "" : " ") + KERRMODE_BIN + " " + args, dir);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      cells.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ext) ++n;
  return n;
}

}  // namespace

TEST_CASE("help text documents the CSV columns and exits cleanly") {
  const fs::path dir = scratch_dir("help");
  const RunResult r = run_cmd(std::string(KERRMODE_BIN) + " --help", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("eig") != std::string::npos);
  CHECK(r.out.find("scatter") != std::string::npos);

  const RunResult h = run_cmd(std::string(KERRMODE_BIN) + " scatter --help", dir);
  CHECK(h.code == 0);
  CHECK(h.out.find("flux_residual") != std::string::npos);

  // missing required --config is a usage (config) error
  const RunResult bad = run_cmd(std::string(KERRMODE_BIN) + " eig", dir);
  CHECK(bad.code == 2);
}

TEST_CASE("eig on a Schwarzschild background reproduces l(l+1)") {
  const fs::path dir = scratch_dir("eig_schw");
  const std::string cfg = (dir / "run.cfg").string();
  spit(cfg,
       "background.M = 1\n"
       "background.a = 0\n"
       "background.k = 1\n"
       "angular.n_max = 4\n"
       "eig.omega_min = -0.6\n"
       "eig.omega_max = 0.6\n"
       "eig.count = 5\n");
  const RunResult r = run_tool("--config " + cfg + " --out " + dir.string() + " eig", dir);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);

  const auto rows = read_csv((dir / "eig.csv").string());
  REQUIRE(rows.size() == 1 + 5 * 4);
  CHECK(rows[0] == std::vector<std::string>{"omega", "n", "lambda"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double n = std::stod(rows[i][1]);
    const double l = 1.0 + (n - 1.0);  // l starts at |k|
    const double lambda = std::stod(rows[i][2]);
    CHECK(std::abs(lambda - l * (l + 1.0)) < 1e-10);
  }
}

TEST_CASE("cache: warm runs are byte-identical and the env override works") {
  const fs::path dir = scratch_dir("cache");
  const fs::path cache = dir / "cache";
  const std::string cfg = (dir / "run.cfg").string();
  spit(cfg,
       "background.a = 0.5\n"
       "background.k = 1\n"
       "angular.n_max = 2\n"
       "eig.omega_min = -0.4\n"
       "eig.omega_max = 0.4\n"
       "eig.count = 3\n");

  const fs::path out1 = dir / "out1", out2 = dir / "out2", out3 = dir / "out3";
  const std::string common = "--config " + cfg + " --cache " + cache.string();
  const RunResult r1 = run_tool(common + " --out " + out1.string() +
                                    " --deterministic --seed 7 eig",
                                dir);
  REQUIRE(r1.code == 0);
  CHECK(count_files(cache, ".kmt") == 1);

  const RunResult r2 = run_tool(common + " --out " + out2.string() + " eig", dir);
  REQUIRE(r2.code == 0);
  CHECK(r2.err.find("cache hit") != std::string::npos);
  CHECK(slurp((out1 / "eig.csv").string()) == slurp((out2 / "eig.csv").string()));

  // same cache through the environment variable instead of the flag
  const RunResult r3 = run_tool(
      "--config " + cfg + " --out " + out3.string() + " eig", dir,
      "KERR_SCATTER_CACHE=" + cache.string());
  REQUIRE(r3.code == 0);
  CHECK(r3.err.find("cache hit") != std::string::npos);
  CHECK(slurp((out1 / "eig.csv").string()) == slurp((out3 / "eig.csv").string()));
}

TEST_CASE("malformed config exits 2 with a line-numbered diagnostic") {
  const fs::path dir = scratch_dir("badcfg");
  const std::string cfg = (dir / "bad.cfg").string();
  spit(cfg, "# comment\nbackground.M 1\n");
  const RunResult r = run_tool("--config " + cfg + " eig", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("config error") != std::string::npos);
  CHECK(r.err.find(":2:") != std::string::npos);

  // over-extreme spin also maps to a config error
  const std::string spin = (dir / "spin.cfg").string();
  spit(spin, "background.M = 1\nbackground.a = 2\n");
  const RunResult s = run_tool("--config " + spin + " eig", dir);
  CHECK(s.code == 2);
  CHECK(s.err.find("config error") != std::string::npos);
}

TEST_CASE("scatter: flux residuals, superradiant flags, exclusion holes") {
  const fs::path dir = scratch_dir("scatter");
  const std::string cfg = (dir / "run.cfg").string();
  spit(cfg,
       "background.a = 0.5\n"
       "background.k = 1\n"
       "angular.n_max = 2\n"
       "radial.tol = 1e-10\n"
       "spectral.exclusion_radius = 0.02\n"
       "scatter.omega_min = -0.6\n"
       "scatter.omega_max = 0.6\n"
       "scatter.count = 13\n");
  const RunResult r =
      run_tool("--config " + cfg + " --out " + dir.string() + " scatter", dir);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);

  const kerr::KerrBackground bg(1.0, 0.5, 1);
  const auto rows = read_csv((dir / "scatter.csv").string());
  REQUIRE(rows.size() > 1);
  // ladder has 13 points; omega = 0 sits inside the exclusion radius
  CHECK(rows.size() == 1 + 12 * 2);
  bool saw_superradiant = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double w = std::stod(rows[i][0]);
    const double flux = std::stod(rows[i][9]);
    const int flag = std::stoi(rows[i][10]);
    CHECK(std::abs(w) >= 0.02);
    CHECK(std::abs(w - bg.omega0) >= 0.02);
    CHECK(std::abs(flux) < 1e-6);
    CHECK(flag == (w * (w - bg.omega0) < 0.0 ? 1 : 0));
    saw_superradiant = saw_superradiant || flag == 1;
  }
  CHECK(saw_superradiant);  // omega = -0.1 lies in the superradiant band
}

TEST_CASE("scatter cache: tampered table is rejected and recomputed") {
  const fs::path dir = scratch_dir("tamper");
  const fs::path cache = dir / "cache";
  const std::string cfg = (dir / "run.cfg").string();
  spit(cfg,
       "background.a = 0.5\n"
       "background.k = 1\n"
       "angular.n_max = 1\n"
       "radial.tol = 1e-10\n"
       "scatter.omega_min = 0.3\n"
       "scatter.omega_max = 0.5\n"
       "scatter.count = 3\n");
  const std::string common = "--config " + cfg + " --cache " + cache.string();
  const fs::path out1 = dir / "out1", out2 = dir / "out2";
  REQUIRE(run_tool(common + " --out " + out1.string() + " scatter", dir).code == 0);

  // flip one byte of the stored background hash
  std::string table;
  for (const auto& e : fs::directory_iterator(cache))
    if (e.path().extension() == ".kmt") table = e.path().string();
  REQUIRE(!table.empty());
  {
    std::FILE* f = std::fopen(table.c_str(), "rb+");
    REQUIRE(f != nullptr);
    std::fseek(f, 14, SEEK_SET);  // magic(4) + version header(4 + 5) + 1
    const int b = std::fgetc(f);
    std::fseek(f, 14, SEEK_SET);
    std::fputc(b ^ 0x5a, f);
    std::fclose(f);
  }

  const RunResult r2 = run_tool(common + " --out " + out2.string() + " scatter", dir);
  REQUIRE(r2.code == 0);
  CHECK(r2.err.find("cache rejected") != std::string::npos);
  CHECK(slurp((out1 / "scatter.csv").string()) ==
        slurp((out2 / "scatter.csv").string()));

  // the rejected table was rewritten: a third run hits the cache again
  const RunResult r3 = run_tool(common + " --out " + out2.string() + " scatter", dir);
  REQUIRE(r3.code == 0);
  CHECK(r3.err.find("cache hit") != std::string::npos);
}

TEST_CASE("validate: Schwarzschild run passes every applicable check") {
  const fs::path dir = scratch_dir("validate");
  const std::string cfg = (dir / "run.cfg").string();
  spit(cfg,
       "background.M = 1\n"
       "background.a = 0\n"
       "background.k = 1\n");
  const RunResult r =
      run_tool("--config " + cfg + " --out " + dir.string() + " validate", dir);
  CAPTURE(r.out);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("all checks passed") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("l(l+1)") != std::string::npos);
  CHECK(r.out.find("n/a") != std::string::npos);  // ergosphere checks skipped at a = 0

  // spinning background exercises the ergosphere and superradiance branches
  const std::string spin = (dir / "spin.cfg").string();
  spit(spin,
       "background.a = 0.5\n"
       "background.k = 1\n"
       "radial.tol = 1e-10\n");
  const RunResult s =
      run_tool("--config " + spin + " --out " + dir.string() + " validate", dir);
  CAPTURE(s.out);
  CAPTURE(s.err);
  REQUIRE(s.code == 0);
  CHECK(s.out.find("all checks passed") != std::string::npos);
  CHECK(s.out.find("negative density inside the ergosphere") != std::string::npos);
  CHECK(s.out.find("PSD split") != std::string::npos);
  CHECK(s.out.find("n/a") == std::string::npos);
}

TEST_CASE("evolve writes snapshots readable by the library and the exporter") {
  const fs::path dir = scratch_dir("evolve");
  const std::string cfg = (dir / "run.cfg").string();
  spit(cfg,
       "background.a = 0.5\n"
       "background.k = 1\n"
       "grid.u_min = -20\n"
       "grid.u_max = 20\n"
       "grid.nu = 401\n"
       "grid.ncostheta = 6\n"
       "evolve.t_end = 2\n"
       "evolve.snapshots = 1, 2\n");
  const RunResult r =
      run_tool("--config " + cfg + " --out " + dir.string() + " evolve", dir);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  CHECK(count_files(dir, ".kfs") == 2);

  const kerr::Snapshot s = kerr::read_snapshot((dir / "snapshot_001.kfs").string());
  CHECK(s.state.time == 2.0);
  CHECK(s.bg.a == 0.5);
  CHECK(s.state.nu() == 401);

  const auto energy = read_csv((dir / "energy.csv").string());
  REQUIRE(energy.size() == 3);
  CHECK(energy[0] == std::vector<std::string>{"t", "energy"});
  // the field stays inside the grid for t <= 2, so energy is conserved
  CHECK(std::stod(energy[2][1]) ==
        doctest::Approx(std::stod(energy[1][1])).epsilon(1e-6));

  const std::string csv = (dir / "snap.csv").string();
  const RunResult x = run_cmd(std::string(FIELDSTATE2CSV_BIN) + " " +
                                  (dir / "snapshot_000.kfs").string() + " -o " + csv,
                              dir);
  REQUIRE(x.code == 0);
  const std::string text = slurp(csv);
  CHECK(text.find("u,costheta,re_psi1,im_psi1,re_psi2,im_psi2") != std::string::npos);
  CHECK(read_csv(csv).size() == 1 + 401 * 6);

  const RunResult bad = run_cmd(std::string(FIELDSTATE2CSV_BIN) + " " + cfg, dir);
  CHECK(bad.code == 1);  // not a snapshot file
}

TEST_CASE("synth reproduces the time-domain run it is compared against") {
  const fs::path dir = scratch_dir("synth");
  const std::string cfg = (dir / "run.cfg").string();
  spit(cfg,
       "background.a = 0.5\n"
       "background.k = 1\n"
       "grid.u_min = -30\n"
       "grid.u_max = 30\n"
       "grid.nu = 301\n"
       "grid.ncostheta = 8\n"
       "initial.width = 2\n"
       "spectral.n_max = 2\n"
       "spectral.W = 1.2\n"
       "radial.tol = 1e-10\n"
       "synth.times = 2\n"
       "synth.compare = evolve\n"
       "compare.u_min = -8\n"
       "compare.u_max = 8\n");
  const RunResult r =
      run_tool("--config " + cfg + " --out " + dir.string() + " synth", dir);
  CAPTURE(r.err);
  CAPTURE(r.out);
  REQUIRE(r.code == 0);
  CHECK(count_files(dir, ".kfs") == 1);

  const std::size_t pos = r.out.find("relative L2 = ");
  REQUIRE(pos != std::string::npos);
  const double rel = std::stod(r.out.substr(pos + 14));
  CHECK(rel < 0.05);

  const auto cmp = read_csv((dir / "compare.csv").string());
  REQUIRE(cmp.size() == 2);
  CHECK(std::stod(cmp[1][1]) == doctest::Approx(rel).epsilon(1e-6));
}

TEST_CASE("energy consumes evolve snapshots and sweeps boundedness") {
  const fs::path dir = scratch_dir("energy");
  const fs::path snaps = dir / "snaps";
  fs::create_directories(snaps);
  const std::string cfg = (dir / "run.cfg").string();
  spit(cfg,
       "background.a = 0.9\n"
       "background.k = 1\n"
       "grid.u_min = -20\n"
       "grid.u_max = 20\n"
       "grid.nu = 401\n"
       "grid.ncostheta = 8\n"
       "evolve.t_end = 2\n"
       "evolve.snapshots = 0, 1, 2\n"
       "energy.input_dir = " + snaps.string() + "\n");
  REQUIRE(run_tool("--config " + cfg + " --out " + snaps.string() + " evolve", dir)
              .code == 0);
  const RunResult r =
      run_tool("--config " + cfg + " --out " + dir.string() + " energy", dir);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);

  const auto rows = read_csv((dir / "energy_sweep.csv").string());
  REQUIRE(rows.size() == 1 + 3);
  CHECK(rows[0][0] == "t");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][2]) >= 0.0);          // exterior energy
    CHECK(std::stoi(rows[i][8]) == 0);            // no growth alert
  }
  CHECK(r.out.find("sup exterior energy") != std::string::npos);

  // a mismatched background must be refused
  const std::string cfg2 = (dir / "other.cfg").string();
  spit(cfg2,
       "background.a = 0.5\n"
       "background.k = 1\n"
       "energy.input_dir = " + snaps.string() + "\n");
  const RunResult bad =
      run_tool("--config " + cfg2 + " --out " + dir.string() + " energy", dir);
  CHECK(bad.code == 1);
  CHECK(bad.err.find("background") != std::string::npos);
}

TEST_CASE("superradiance command emits the wave-packet JSON schema") {
  const fs::path dir = scratch_dir("superradiance");
  const std::string cfg = (dir / "run.cfg").string();
  spit(cfg,
       "background.a = 0.9\n"
       "background.k = 1\n"
       "superradiance.L = 4\n"
       "superradiance.t_end = 4\n"
       "superradiance.u_min = -25\n"
       "superradiance.du = 0.2\n"
       "superradiance.ncostheta = 8\n"
       "superradiance.grid_buffer = 5\n"
       "spectral.n_max = 2\n"
       "spectral.W = 1.2\n"
       "radial.tol = 1e-10\n");
  const RunResult r = run_tool(
      "--config " + cfg + " --out " + dir.string() + " superradiance", dir);
  CAPTURE(r.err);
  REQUIRE(r.code == 0);

  const auto doc = nlohmann::json::parse(slurp((dir / "superradiance.json").string()));
  REQUIRE(doc.is_array());
  REQUIRE(doc.size() == 1);
  const auto& run = doc[0];
  for (const char* key :
       {"L", "omega_tilde", "total_energy", "exterior_energy", "amplification",
        "low_energy", "split_J", "flux_ratio", "flux_ratio_by_mode", "mode_energy",
        "tail_energy", "superradiant"})
    REQUIRE(run.contains(key));
  CHECK(run["L"].get<double>() == 4.0);
  CHECK(run["superradiant"].get<bool>());
  CHECK(run["flux_ratio"].get<double>() > 1.0);
  const kerr::KerrBackground bg(1.0, 0.9, 1);
  CHECK(run["omega_tilde"].get<double>() == doctest::Approx(0.5 * bg.omega0));
}
