#pragma once

// Run modes behind the command-line tool. Each mode writes its artifacts to
// an output directory and returns a process exit code:
//   0 success, 2 configuration error, 3 numerical failure, 4 identity violation.

#include <cinttypes>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "viscoflow/config.hpp"
#include "viscoflow/identities.hpp"
#include "viscoflow/io.hpp"
#include "viscoflow/mms.hpp"
#include "viscoflow/parallel.hpp"
#include "viscoflow/scenario.hpp"

namespace viscoflow {

enum ExitCode { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_identity = 4 };

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse_error:
    case ErrorKind::validation_error: return exit_config;
    case ErrorKind::identity_violation: return exit_identity;
    default: return exit_numerical;
  }
}

struct RunOutcome {
  int exit_code = exit_ok;
  std::optional<ErrorKind> error;
  std::string message;
  std::optional<long> failed_step;
  SimState state;  // last valid state (empty grid if initialization failed)
  std::vector<EnergyBudget> history;
  double min_lambda = std::numeric_limits<double>::infinity();
};

namespace detail {

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir + ": " + ec.message());
  return p;
}

inline std::string hex64(std::uint64_t x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, x);
  return buf;
}

inline void write_manifest(const std::filesystem::path& dir, const SimConfig& c, const Grid& g,
                           const RunOutcome& r, const std::string& extra = "") {
  std::ofstream f(dir / "manifest.txt", std::ios::binary);
  f << "viscoflow_version = " << version_string << "\n";
  f << "mode = " << c.mode << "\n";
  f << "grid_hash = " << hex64(g.hash()) << "\n";
  for (int d = 0; d < 3; ++d)
    f << "bc_" << "xyz"[d] << " = " << to_string(g.bc[d][0]) << " " << to_string(g.bc[d][1]) << "\n";
  f << "lid_velocity_upper_y = " << fmt17(g.wall_velocity[1][1][0]) << "\n";
  f << "extrapolated_regime = " << (c.model.extrapolated_regime() ? "true" : "false") << "\n";
  f << "status = " << (r.error ? to_string(*r.error) : "ok") << "\n";
  f << "exit_code = " << r.exit_code << "\n";
  if (!r.message.empty()) f << "error = " << r.message << "\n";
  if (r.failed_step) f << "failed_step = " << *r.failed_step << "\n";
  f << "steps = " << r.state.step << "\n";
  f << "t_final = " << fmt17(r.state.t) << "\n";
  f << extra;
  f << "\n# configuration (canonical form)\n" << emit_config(c);
}

inline StepReport initial_report(const SimState& s) {
  StepReport r;
  const PositivityStats st = positivity_stats(s.B);
  r.min_lambda = st.min_lambda;
  r.argmin_cell = st.argmin;
  r.min_det = st.min_det;
  r.max_norm = st.max_norm;
  return r;
}

}  // namespace detail

struct SimulateOptions {
  bool track_budget = true;
  std::function<void(const SimState&, const StepReport&, const EnergyBudget&)> on_step;
};

/// Builds the configured scenario with parameters `p` and integrates it to
/// t_end. Errors are caught and reported in the outcome.
inline RunOutcome simulate(const SimConfig& c, const ModelParams& p, const SimulateOptions& o = {}) {
  RunOutcome out;
  try {
    const Scenario sc = make_scenario(c.scenario, c.grid());
    out.state = init_state(sc.v0, sc.b0, p, sc.grid);
    StepperOptions so;
    so.cfl_max = c.time.cfl_max;
    Stepper st(sc.grid, p, so);
    const StepReport r0 = detail::initial_report(out.state);
    out.min_lambda = r0.min_lambda;
    if (o.track_budget) {
      out.history.push_back(compute_budget(out.state));
      if (o.on_step) o.on_step(out.state, r0, out.history.back());
    }
    double acc = 0.0;
    run(st, out.state, c.time.t_end, c.time.dt, [&](const SimState& s, const StepReport& r) {
      out.min_lambda = std::min(out.min_lambda, r.min_lambda);
      if (!o.track_budget) {
        if (o.on_step) o.on_step(s, r, EnergyBudget{});
        return;
      }
      EnergyBudget b = compute_budget(s);
      acc += r.dt * (b.dissipation() - b.work);
      b.residual = b.energy() - out.history.front().energy() + acc;
      b.residual_positive = std::max(0.0, b.residual);
      out.history.push_back(b);
      if (o.on_step) o.on_step(s, r, b);
    }, sc.forcing);
  } catch (const Error& e) {
    out.error = e.kind();
    out.message = e.what();
    out.failed_step = e.step();
    out.exit_code = exit_code_for(e.kind());
  }
  return out;
}

/// `run` mode: energy.csv, timing.csv, snapshots and manifest.txt.
inline RunOutcome run_scenario(const SimConfig& c, const std::string& out_dir, std::ostream& log = std::cout) {
  const auto dir = detail::prepare_dir(out_dir);
  set_thread_count(c.threads);
  std::ofstream energy(dir / "energy.csv", std::ios::binary);
  std::ofstream timing(dir / "timing.csv", std::ios::binary);
  energy << csv_header(energy_columns());
  timing << csv_header({"step", "wall_seconds"});
  const std::string ext = c.output.format == "raw" ? ".raw" : ".vtk";
  auto snapshot = [&](const SimState& s) {
    if (c.output.format == "none") return;
    char name[40];
    std::snprintf(name, sizeof name, "snapshot_%06ld", s.step);
    const std::string path = (dir / (std::string(name) + ext)).string();
    if (c.output.format == "raw") write_raw(path, s);
    else write_vtk(path, s);
  };
  long last_snap = -1;
  SimulateOptions o;
  o.on_step = [&](const SimState& s, const StepReport& r, const EnergyBudget& b) {
    const bool final = s.t >= c.time.t_end - 1e-12 * std::max(1.0, c.time.t_end);
    if (s.step % c.output.energy_every == 0 || final) energy << energy_row(b, r);
    timing << s.step << "," << fmt17(r.wall_seconds) << "\r\n";
    if (c.output.snapshot_every > 0 && s.step % c.output.snapshot_every == 0) {
      snapshot(s);
      last_snap = s.step;
    }
  };
  if (c.model.extrapolated_regime()) log << "note: |a| > 1, extrapolated regime\n";
  RunOutcome out = simulate(c, c.model, o);
  if (!out.state.B.empty() && last_snap != out.state.step) snapshot(out.state);
  const Grid g = out.state.B.empty() ? scenario_grid(c.scenario, c.grid()) : out.state.grid;
  detail::write_manifest(dir, c, g, out);
  if (out.error) {
    log << out.message << "\n";
  } else {
    log << "run finished: " << out.state.step << " steps, t = " << fmt17(out.state.t)
        << ", min lambda = " << fmt17(out.min_lambda) << "\n";
  }
  return out;
}

/// `verify_mms` mode: convergence table mms.csv. The cut-off is disabled
/// because the injected forcing assumes rho = 1.
inline int verify_mms_mode(const SimConfig& c, const std::string& out_dir, MmsReport* report = nullptr,
                           std::ostream& log = std::cout) {
  const auto dir = detail::prepare_dir(out_dir);
  set_thread_count(c.threads);
  ModelParams p = c.model;
  p.eps = 0.0;
  RunOutcome status;
  MmsReport rep;
  try {
    rep = verify_mms(c.mms, p);
  } catch (const Error& e) {
    status.error = e.kind();
    status.message = e.what();
    status.exit_code = exit_code_for(e.kind());
  }
  std::ofstream f(dir / "mms.csv", std::ios::binary);
  f << csv_header({"kind", "n", "h", "dt", "err_v", "err_b", "order_v", "order_b"});
  for (std::size_t l = 0; l < rep.spatial.size(); ++l) {
    const MmsLevel& m = rep.spatial[l];
    f << "spatial," << m.n << "," << fmt17(m.h) << "," << fmt17(m.dt) << "," << fmt17(m.err_v) << ","
      << fmt17(m.err_b) << "," << (l ? fmt17(rep.order_v[l - 1]) : "") << "," << (l ? fmt17(rep.order_b[l - 1]) : "")
      << "\r\n";
  }
  for (std::size_t l = 0; l < rep.temporal.size(); ++l) {
    const MmsTemporal& m = rep.temporal[l];
    f << "temporal," << c.mms.temporal_n << "," << fmt17(1.0 / c.mms.temporal_n) << "," << fmt17(m.dt) << ","
      << fmt17(m.diff_v) << "," << fmt17(m.diff_b) << "," << (l ? fmt17(rep.temporal_order_v[l - 1]) : "") << ","
      << (l ? fmt17(rep.temporal_order_b[l - 1]) : "") << "\r\n";
  }
  std::ostringstream extra;
  if (!status.error) {
    extra << "min_spatial_order = " << fmt17(rep.min_spatial_order()) << "\n";
    extra << "min_temporal_order = " << fmt17(rep.min_temporal_order()) << "\n";
    extra << "one_step_error = " << fmt17(rep.one_step_err[0]) << " " << fmt17(rep.one_step_err[1]) << "\n";
    log << "verify_mms: min spatial order " << fmt17(rep.min_spatial_order()) << ", min temporal order "
        << fmt17(rep.min_temporal_order()) << "\n";
  } else {
    log << status.message << "\n";
  }
  detail::write_manifest(dir, c, mms_grid(c.mms.n0), status, extra.str());
  if (report) *report = rep;
  return status.exit_code;
}

struct SweepRow {
  double value = 0.0;  // eps or gamma
  double dist_v = 0.0;
  double dist_b = 0.0;
  double b0_dist = 0.0;
  double min_rho0 = 0.0;
  double min_lambda = 0.0;
  double final_energy = 0.0;
  double max_abs_residual = 0.0;
  std::string status = "ok";
};

struct SweepReport {
  std::vector<SweepRow> rows;
  bool monotone = true;
  int exit_code = exit_ok;
};

/// `sweep_eps` mode: identical runs per eps, L2 distance of the final state
/// to the eps = 0 run, |B0^eps - B0| and min rho at t = 0.
inline SweepReport sweep_eps_mode(const SimConfig& c, const std::string& out_dir, std::ostream& log = std::cout) {
  const auto dir = detail::prepare_dir(out_dir);
  set_thread_count(c.threads);
  std::vector<double> eps = c.sweep.eps;
  if (std::find(eps.begin(), eps.end(), 0.0) == eps.end()) eps.push_back(0.0);
  SweepReport rep;
  SimulateOptions o;
  o.track_budget = false;
  ModelParams p0 = c.model;
  p0.eps = 0.0;
  const RunOutcome ref = simulate(c, p0, o);
  const Scenario sc = make_scenario(c.scenario, c.grid());
  const Grid& g = sc.grid;
  for (double e : eps) {
    SweepRow row;
    row.value = e;
    ModelParams p = c.model;
    p.eps = e;
    const TensorField b0e = e > 0.0 ? regularize_initial_B(sc.b0, e) : sc.b0;
    row.b0_dist = l2_tensor(b0e, sc.b0, g);
    row.min_rho0 = std::numeric_limits<double>::infinity();
    for (const SymTensor3& b : b0e) row.min_rho0 = std::min(row.min_rho0, cutoff_rho(b, e));
    const RunOutcome r = e == 0.0 ? ref : simulate(c, p, o);
    row.min_lambda = r.min_lambda;
    if (r.error || ref.error) {
      row.status = r.error ? to_string(*r.error) : "reference failed";
      rep.exit_code = exit_numerical;
    } else {
      row.dist_v = l2_velocity(r.state.v, ref.state.v, g);
      row.dist_b = l2_tensor(r.state.B, ref.state.B, g);
    }
    rep.rows.push_back(row);
  }
  std::vector<const SweepRow*> positive;
  for (const SweepRow& r : rep.rows)
    if (r.value > 0.0) positive.push_back(&r);
  std::sort(positive.begin(), positive.end(), [](auto* a, auto* b) { return a->value > b->value; });
  for (std::size_t i = 1; i < positive.size(); ++i)
    rep.monotone = rep.monotone && positive[i]->dist_v + positive[i]->dist_b < positive[i - 1]->dist_v + positive[i - 1]->dist_b;

  std::ofstream f(dir / "sweep_eps.csv", std::ios::binary);
  f << csv_header({"eps", "dist_v", "dist_b", "b0_dist", "min_rho0", "min_lambda", "status"});
  for (const SweepRow& r : rep.rows)
    f << fmt17(r.value) << "," << fmt17(r.dist_v) << "," << fmt17(r.dist_b) << "," << fmt17(r.b0_dist) << ","
      << fmt17(r.min_rho0) << "," << fmt17(r.min_lambda) << "," << r.status << "\r\n";
  RunOutcome st;
  st.exit_code = rep.exit_code;
  st.state = ref.state;
  detail::write_manifest(dir, c, g, st, std::string("monotone = ") + (rep.monotone ? "true" : "false") + "\n");
  log << "sweep_eps: distances " << (rep.monotone ? "decrease" : "do NOT decrease") << " monotonically with eps\n";
  return rep;
}

/// `sweep_gamma` mode: one run per gamma; final energy, budget residual,
/// positivity margin and the distance to the previous gamma's final state.
inline SweepReport sweep_gamma_mode(const SimConfig& c, const std::string& out_dir, std::ostream& log = std::cout) {
  const auto dir = detail::prepare_dir(out_dir);
  set_thread_count(c.threads);
  SweepReport rep;
  std::optional<SimState> prev;
  Grid g = scenario_grid(c.scenario, c.grid());
  for (double gamma : c.sweep.gamma) {
    SweepRow row;
    row.value = gamma;
    ModelParams p = c.model;
    p.gamma = gamma;
    const RunOutcome r = simulate(c, p);
    row.min_lambda = r.min_lambda;
    if (r.error) {
      row.status = to_string(*r.error);
      rep.exit_code = exit_numerical;
    } else {
      row.final_energy = r.history.back().energy();
      for (const EnergyBudget& b : r.history) row.max_abs_residual = std::max(row.max_abs_residual, std::abs(b.residual));
      if (prev) {
        row.dist_v = l2_velocity(r.state.v, prev->v, g);
        row.dist_b = l2_tensor(r.state.B, prev->B, g);
      }
      prev = r.state;
    }
    rep.rows.push_back(row);
  }
  std::ofstream f(dir / "sweep_gamma.csv", std::ios::binary);
  f << csv_header({"gamma", "final_energy", "max_abs_residual", "min_lambda", "dist_v_prev", "dist_b_prev", "status"});
  for (const SweepRow& r : rep.rows)
    f << fmt17(r.value) << "," << fmt17(r.final_energy) << "," << fmt17(r.max_abs_residual) << ","
      << fmt17(r.min_lambda) << "," << fmt17(r.dist_v) << "," << fmt17(r.dist_b) << "," << r.status << "\r\n";
  RunOutcome st;
  st.exit_code = rep.exit_code;
  detail::write_manifest(dir, c, g, st);
  log << "sweep_gamma: " << rep.rows.size() << " runs\n";
  return rep;
}

/// `check_identities` mode.
inline int check_identities_mode(const SimConfig& c, const std::string& out_dir, std::ostream& log = std::cout) {
  const auto dir = detail::prepare_dir(out_dir);
  IdentitySweepOptions o;
  o.seed = c.seed;
  o.samples = c.identities.samples;
  o.convexity_samples = c.identities.convexity_samples;
  o.mutation = c.identities.mutation == "negate_gamma_term" ? Mutation::negate_gamma_term : Mutation::none;
  std::ofstream f(dir / "identities.txt", std::ios::binary);
  RunOutcome st;
  std::ostringstream extra;
  try {
    const IdentitySweepReport r = check_identity_suite(o);
    const CutoffReport cr = check_cutoff(c.seed, std::max<long>(1, o.samples / 10));
    f << "samples = " << r.samples << "\n";
    f << "max_identity_relative = " << fmt17(r.max_identity_rel) << "\n";
    f << "max_diffusion_relative = " << fmt17(r.max_diffusion_rel) << "\n";
    f << "min_entropy_term = " << fmt17(r.min_entropy) << "\n";
    f << "min_convexity_slack = " << fmt17(r.min_convexity_slack) << "\n";
    f << "min_hencky_ratio = " << fmt17(r.min_hencky_ratio) << "\n";
    f << "cutoff_range = " << (cr.range_ok ? "pass" : "fail") << "\n";
    f << "cutoff_zero_iff = " << (cr.zero_iff_ok ? "pass" : "fail") << "\n";
    f << "cutoff_monotone = " << (cr.monotone_ok ? "pass" : "fail") << "\n";
    if (!(cr.range_ok && cr.zero_iff_ok && cr.monotone_ok))
      throw IdentityViolation("cut-off property check failed", "");
    log << "check_identities: pass, max identity residual " << fmt17(std::max(r.max_identity_rel, r.max_diffusion_rel))
        << " over " << r.samples << " samples\n";
  } catch (const IdentityViolation& e) {
    st.error = e.kind();
    st.message = e.what();
    st.exit_code = exit_identity;
    f << "violation = " << st.message << "\n";
    log << st.message << "\n";
  } catch (const Error& e) {
    st.error = e.kind();
    st.message = e.what();
    st.exit_code = exit_code_for(e.kind());
    log << st.message << "\n";
  }
  detail::write_manifest(dir, c, c.grid(), st);
  return st.exit_code;
}

/// Dispatches on c.mode; returns the process exit code.
inline int run_mode(const SimConfig& c, const std::string& out_dir, std::ostream& log = std::cout) {
  if (c.mode == "run") return run_scenario(c, out_dir, log).exit_code;
  if (c.mode == "verify_mms") return verify_mms_mode(c, out_dir, nullptr, log);
  if (c.mode == "sweep_eps") return sweep_eps_mode(c, out_dir, log).exit_code;
  if (c.mode == "sweep_gamma") return sweep_gamma_mode(c, out_dir, log).exit_code;
  if (c.mode == "check_identities") return check_identities_mode(c, out_dir, log);
  throw ValidationError("run.mode", "unknown mode '" + c.mode + "'");
}

}  // namespace viscoflow
