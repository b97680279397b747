#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "viscoflow/app.hpp"

using namespace viscoflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("viscoflow_test_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

SimConfig small(const std::string& scenario) {
  SimConfig c;
  c.cells = {8, 8, 1};
  c.length = {1.0, 1.0, 0.125};
  c.scenario.name = scenario;
  c.time.dt = 0.01;
  c.time.t_end = 0.05;
  c.output.format = "none";
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VISCOFLOW_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const SimConfig c = parse_config("");
  EXPECT_EQ(c.scenario.name, "rest_state");
  EXPECT_EQ(c.cells, (Index3{16, 16, 16}));
  EXPECT_EQ(c.model.gamma, 0.5);
  EXPECT_EQ(c.model.delta1, 1.0);
  EXPECT_EQ(c.model.delta2, 0.0);
  EXPECT_EQ(c.mode, "run");
}

TEST(Config, Errors) {
  try {
    parse_config("[model]\ngamma = 1.5\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.key, "gamma");
    EXPECT_EQ(e.constraint, "must lie in (0,1)");
  }
  try {
    parse_config("# comment\n[model]\nnu = 1\nviscosity = 2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 4);
  }
  EXPECT_THROW(parse_config("[nonsense]\n"), ParseError);
  EXPECT_THROW(parse_config("nu = 1\n"), ParseError);
  EXPECT_THROW(parse_config("[model]\nnu = fast\n"), ParseError);
  EXPECT_THROW(parse_config("[model]\nnu = 1\nnu = 2\n"), ParseError);
  EXPECT_THROW(parse_config("[grid]\nnx = 3\n"), ValidationError);
  EXPECT_THROW(parse_config("[model]\ngamma = 0\n"), ValidationError);
  EXPECT_NO_THROW(parse_config("[model]\ngamma = 0\nclassical_diagnostics = true\n"));
  EXPECT_THROW(parse_config("[scenario]\nname = vortex\n"), ValidationError);
  EXPECT_THROW(parse_config("[model]\npreset = maxwell\n"), ParseError);
}

TEST(Config, PresetAppliesBeforeExplicitKeys) {
  const SimConfig c = parse_config("[model]\ndelta2 = 0.5\npreset = giesekus\n");
  EXPECT_EQ(c.model.delta1, 0.0);
  EXPECT_EQ(c.model.delta2, 0.5);
}

TEST(Config, SampleRoundTripsByteIdentically) {
  const SimConfig c = parse_config(slurp(VISCOFLOW_SAMPLE_CONFIG));
  EXPECT_EQ(c.scenario.name, "shear_decay");
  const std::string once = emit_config(c);
  EXPECT_EQ(emit_config(parse_config(once)), once);
}

TEST(Config, AwkwardNumbersRoundTrip) {
  SimConfig c;
  c.model.nu = 1.0 / 3.0;
  c.model.sigma = 1e-300;
  c.model.a = -0.1;
  c.length = {2 * std::numbers::pi, std::exp(1.0), 0.1};
  c.sweep.eps = {0.1, 1.0 / 7.0, 0.0};
  c.seed = 18446744073709551615ull;
  const SimConfig r = parse_config(emit_config(c));
  EXPECT_EQ(r.model.nu, c.model.nu);
  EXPECT_EQ(r.model.sigma, c.model.sigma);
  EXPECT_EQ(r.length, c.length);
  EXPECT_EQ(r.sweep.eps, c.sweep.eps);
  EXPECT_EQ(r.seed, c.seed);
  EXPECT_EQ(emit_config(r), emit_config(c));
}

TEST(Io, EnergyColumnsNameEveryBudgetField) {
  const auto& cols = energy_columns();
  for (const char* f : {"kinetic", "free_energy", "viscous_diss", "slip_diss", "diff_diss_gamma", "diff_diss_inv",
                        "relax_diss_1", "relax_diss_2", "relax_diss_3", "work", "residual"})
    EXPECT_NE(std::find(cols.begin(), cols.end(), f), cols.end()) << f;
  const std::string row = energy_row({}, {});
  EXPECT_EQ(static_cast<std::size_t>(std::count(row.begin(), row.end(), ',')), cols.size() - 1);
}

TEST(Io, VtkAndRawSnapshots) {
  const fs::path dir = scratch("io");
  fs::create_directories(dir);
  SimConfig c = small("taylor_green");
  const Scenario sc = make_scenario(c.scenario, c.grid());
  SimState s = init_state(sc.v0, sc.b0, c.model, sc.grid);
  s.B[5] = SymTensor3::diag(0.5, 2.0, 3.0);
  write_vtk((dir / "a.vtk").string(), s);
  const std::string vtk = slurp(dir / "a.vtk");
  EXPECT_EQ(vtk.rfind("# vtk DataFile Version 3.0\n", 0), 0u);
  EXPECT_NE(vtk.find("DIMENSIONS 8 8 1"), std::string::npos);
  for (const char* a : {"SCALARS B11", "SCALARS B23", "SCALARS lambda_min", "VECTORS velocity"})
    EXPECT_NE(vtk.find(a), std::string::npos) << a;
  EXPECT_EQ(std::count(vtk.begin(), vtk.end(), '\n'), 8 + 7 * (2 + 64) + 1 + 64);

  write_raw((dir / "a.raw").string(), s);
  const RawSnapshot r = read_raw((dir / "a.raw").string());
  EXPECT_EQ(r.n, (Index3{8, 8, 1}));
  ASSERT_EQ(r.comps.size(), 10u);
  EXPECT_EQ(r.comps[0][5], 0.5);
  EXPECT_EQ(r.comps[2][5], 3.0);
  EXPECT_EQ(r.comps[6][5], 0.5);
  const std::vector<Vec3> u = cell_velocity(s.v, s.grid);
  EXPECT_EQ(r.comps[7][9], u[9][0]);
  EXPECT_EQ(fs::file_size(dir / "a.raw"), 8 + 4 + 12 + 4 + 8 + 10 * 64 * 8u);
}

TEST(App, RestStateRowsAreZero) {
  const fs::path dir = scratch("rest");
  SimConfig c = small("rest_state");
  c.output.format = "vtk";
  std::ostringstream log;
  const RunOutcome r = run_scenario(c, dir.string(), log);
  EXPECT_EQ(r.exit_code, 0);
  const auto rows = read_csv(dir / "energy.csv");
  ASSERT_EQ(rows.size(), 7u);
  const auto& h = rows[0];
  for (std::size_t i = 1; i < rows.size(); ++i)
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (h[j] != "step" && h[j] != "t" && h[j] != "dt" && h[j] != "cfl" && h[j].find("lambda") == std::string::npos &&
          h[j] != "min_det" && h[j] != "max_norm" && h[j] != "argmin_cell" && h[j] != "poisson_sweeps" &&
          h[j] != "viscous_iterations") {
        EXPECT_LE(std::abs(std::stod(rows[i][j])), 1e-12) << h[j];
      }
    }
  EXPECT_TRUE(fs::exists(dir / "snapshot_000005.vtk"));
  EXPECT_NE(slurp(dir / "manifest.txt").find("status = ok"), std::string::npos);
}

TEST(App, InadmissibleInitialDataExitsNonzero) {
  const fs::path dir = scratch("defect");
  SimConfig c = small("shear_decay");
  c.scenario.defect = true;
  std::ostringstream log;
  const RunOutcome r = run_scenario(c, dir.string(), log);
  EXPECT_EQ(r.exit_code, exit_numerical);
  EXPECT_NE(slurp(dir / "manifest.txt").find("status = InadmissibleInitialData"), std::string::npos);
}

TEST(App, TaylorGreenDefaultsAndDeterminism) {
  SimConfig c = small("taylor_green");
  c.cells = {8, 8, 8};
  c.length = {1, 1, 1};
  std::ostringstream log;
  const fs::path d1 = scratch("tg1"), d2 = scratch("tg2");
  const RunOutcome a = run_scenario(c, d1.string(), log);
  EXPECT_EQ(a.exit_code, 0);
  EXPECT_GT(a.min_lambda, 0.0);
  c.threads = 3;
  run_scenario(c, d2.string(), log);
  EXPECT_EQ(slurp(d1 / "energy.csv"), slurp(d2 / "energy.csv"));
  set_thread_count(1);
}

TEST(App, NumericalFailureIsReported) {
  const fs::path dir = scratch("cfl");
  SimConfig c = small("taylor_green");
  c.scenario.amplitude = 100.0;
  std::ostringstream log;
  const RunOutcome r = run_scenario(c, dir.string(), log);
  EXPECT_EQ(r.exit_code, exit_numerical);
  EXPECT_EQ(r.error, ErrorKind::cfl_violation);
  EXPECT_EQ(r.failed_step, 1);
  EXPECT_NE(slurp(dir / "manifest.txt").find("failed_step = 1"), std::string::npos);
}

TEST(App, EpsSweep) {
  SimConfig c = small("shear_decay");
  c.cells = {4, 16, 1};
  c.length = {0.25, 1.0, 0.0625};
  c.time.t_end = 0.1;
  std::ostringstream log;
  const SweepReport r = sweep_eps_mode(c, scratch("sweep").string(), log);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(r.monotone);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const SweepRow& row : r.rows) EXPECT_EQ(row.b0_dist, 0.0);
  EXPECT_LT(r.rows[0].min_rho0, r.rows[1].min_rho0);
  EXPECT_LT(r.rows[1].min_rho0, r.rows[2].min_rho0);
  EXPECT_EQ(r.rows[3].min_rho0, 1.0);
  EXPECT_EQ(r.rows[3].dist_v + r.rows[3].dist_b, 0.0);
}

TEST(App, GammaSweep) {
  SimConfig c = small("shear_decay");
  c.cells = {4, 16, 1};
  c.length = {0.25, 1.0, 0.0625};
  std::ostringstream log;
  const SweepReport r = sweep_gamma_mode(c, scratch("gamma").string(), log);
  EXPECT_EQ(r.exit_code, 0);
  ASSERT_EQ(r.rows.size(), 3u);
  for (const SweepRow& row : r.rows) EXPECT_GT(row.min_lambda, 0.0);
  EXPECT_GT(r.rows[1].dist_b, 0.0);
}

TEST(App, CheckIdentitiesAndMutation) {
  SimConfig c;
  c.identities.samples = 2000;
  c.identities.convexity_samples = 500;
  std::ostringstream log;
  EXPECT_EQ(check_identities_mode(c, scratch("ids").string(), log), 0);
  c.identities.mutation = "negate_gamma_term";
  const fs::path dir = scratch("ids_mut");
  EXPECT_EQ(check_identities_mode(c, dir.string(), log), exit_identity);
  EXPECT_NE(slurp(dir / "identities.txt").find("violation"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.cfg") << "[model]\ngamma = 1.5\n";
  std::ofstream(dir / "typo.cfg") << "[model]\ngama = 0.5\n";
  std::ofstream(dir / "ok.cfg") << "[grid]\nnx = 8\nny = 8\nnz = 1\nlz = 0.125\n[time]\nt_end = 0.02\n[output]\nformat = none\n";
  std::ofstream(dir / "mut.cfg") << "[identities]\nsamples = 100\nconvexity_samples = 10\nmutation = negate_gamma_term\n";
  std::ofstream(dir / "defect.cfg") << "[grid]\nnx = 8\nny = 8\nnz = 1\nlz = 0.125\n[scenario]\ndefect = true\n";
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("run --config " + (dir / "ok.cfg").string() + out), 0);
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.cfg").string() + out), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "typo.cfg").string() + out), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "missing.cfg").string() + out), 2);
  EXPECT_EQ(run_cli("explode --config " + (dir / "ok.cfg").string() + out), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "defect.cfg").string() + out), 3);
  EXPECT_EQ(run_cli("check_identities --config " + (dir / "mut.cfg").string() + out + " --seed 7"), 4);
  EXPECT_EQ(run_cli("run --config " + (dir / "ok.cfg").string() + out + " --threads 2"), 0);
  EXPECT_EQ(run_cli("run --config " + std::string(VISCOFLOW_SAMPLE_CONFIG) + out + " --threads 1"), 0);
}
