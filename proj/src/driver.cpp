#include "eleuler/driver.hpp"

#include "eleuler/checkpoint.hpp"
#include "eleuler/el_core.hpp"
#include "eleuler/errors.hpp"
#include "eleuler/oracle.hpp"
#include "eleuler/report.hpp"
#include "eleuler/spectral_ops.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace eleuler {

namespace fs = std::filesystem;

namespace {

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string step_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%07ld.eleu", step);
  return buf;
}

double rel_l2(const SpectralField& a, const SpectralField& b) {
  const double d = l2_norm(b);
  return l2_norm(a - b) / (d > 0.0 ? d : 1.0);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Vorticity stepping from a state, so a resumed oracle run repeats the
// same arithmetic as an uninterrupted one.
Trajectory classical_run(const ResolvedStart& rs, const SolverConfig& cfg, long total_steps,
                         const std::function<void(const VorticityState&, long)>& on_checkpoint) {
  VorticityState w = rs.omega ? VorticityState{rs.omega->component_field(0), 0.0, {}}
                              : vorticity_from_velocity(rs.start.u);
  if (rs.omega) {
    const VorticityState from_u = vorticity_from_velocity(rs.start.u);
    w.mean_velocity = from_u.mean_velocity;
  }
  const int window_steps = whole_steps(cfg.window_T, cfg.dt, "window_T");
  Trajectory traj;
  traj.u0 = rs.start.u0;
  traj.u = FieldSeries(static_cast<double>(rs.start.step) * cfg.dt, cfg.dt, {rs.start.u});
  for (long step = rs.start.step; step < total_steps;) {
    w = classical_step(w, cfg.dt);
    ++step;
    traj.u.samples.push_back(velocity_from_vorticity(w));
    if (on_checkpoint && ((step % (static_cast<long>(window_steps) * cfg.checkpoint_every)) == 0 || step == total_steps))
      on_checkpoint(w, step);
  }
  return traj;
}

}  // namespace

ResolvedStart resolve_start(const SolverConfig& cfg) {
  ResolvedStart rs;
  const std::string& ic = cfg.initial_condition;
  if (is_catalog_name(ic)) {
    rs.start = WindowedStart::fresh(initial_velocity(ic, cfg.n, cfg.N, cfg.seed));
    return rs;
  }
  std::error_code ec;
  if (!fs::is_regular_file(ic, ec))
    throw ConfigError("initial_condition '" + ic + "' is neither a catalog name nor a checkpoint file");
  const Checkpoint c = load_checkpoint(ic);
  if (c.dim != cfg.n || c.grid_n != cfg.N)
    throw ConfigError("checkpoint shape (n=" + std::to_string(c.dim) + ", N=" + std::to_string(c.grid_n) +
                      ") does not match the configuration");
  if (c.s != cfg.s) throw ConfigError("checkpoint was written with s = " + fmt(c.s));
  rs.resumed = true;
  rs.start.step = whole_steps(c.time, cfg.dt, "checkpoint time");
  rs.start.u = c.field("u");
  rs.start.u0 = c.field("u0");
  if (cfg.scheme == Scheme::ClassicalOracle) {
    if (!c.has("omega")) throw ConfigError("checkpoint lacks the vorticity needed by classical_oracle");
    rs.omega = c.field("omega");
    rs.start.eta = SpectralField::zeros_like(rs.start.u);
    rs.start.v = rs.start.u;
  } else {
    if (!c.has("eta") || !c.has("v")) throw ConfigError("checkpoint lacks eta or v needed by " + to_string(cfg.scheme));
    rs.start.eta = c.field("eta");
    rs.start.v = c.field("v");
  }
  return rs;
}

RunResult run(const SolverConfig& cfg, std::ostream& log) {
  validate(cfg);
  const auto wall0 = std::chrono::steady_clock::now();
  const fs::path out = cfg.output_dir;
  make_dirs(out / "checkpoints");
  {
    std::ofstream echo(out / "config.txt");
    if (!echo) throw IoError("cannot write " + (out / "config.txt").string());
    echo << to_string(cfg);
  }

  const ResolvedStart rs = resolve_start(cfg);
  const long total_steps = whole_steps(cfg.total_T, cfg.dt, "total_T");
  log << "run: scheme=" << to_string(cfg.scheme) << " n=" << cfg.n << " N=" << cfg.N << " s=" << cfg.s
      << " dt=" << cfg.dt << " T=" << cfg.total_T << " ic=" << cfg.initial_condition
      << (rs.resumed ? " (resumed at t=" + fmt(static_cast<double>(rs.start.step) * cfg.dt) + ")" : "") << "\n";

  RunResult result;

  if (cfg.scheme == Scheme::ClassicalOracle) {
    result.trajectory = classical_run(rs, cfg, total_steps, [&](const VorticityState& w, long step) {
      Checkpoint c{cfg.n, cfg.N, cfg.s, static_cast<double>(step) * cfg.dt, {}};
      SpectralField omega(w.omega.grid_ptr(), 2);
      omega.set_component(0, w.omega);
      c.fields = {{"u", velocity_from_vorticity(w)}, {"u0", rs.start.u0}, {"omega", omega}};
      const fs::path p = out / "checkpoints" / step_name(step);
      save_checkpoint(p, c);
      result.checkpoints.push_back(p);
    });
  } else {
    int windows = 0;
    result.trajectory = advance_windows(rs.start, cfg, cfg.total_T, [&](const Trajectory& traj, const WindowedStart& cur) {
      ++windows;
      const WindowReport& w = traj.windows.back();
      log << "  window [" << fmt(w.window.t0()) << ", " << fmt(w.window.t1()) << "] sweeps=" << w.sweeps.size()
          << " max_ratio=" << fmt(w.max_ratio) << " halvings=" << w.halvings << " energy=" << w.energy
          << " det=" << fmt(w.det_deviation) << "\n";
      if (windows % cfg.checkpoint_every != 0 && cur.step != total_steps) return;
      Checkpoint c{cfg.n, cfg.N, cfg.s, static_cast<double>(cur.step) * cfg.dt, {}};
      c.fields = {{"u", cur.u}, {"eta", cur.eta}, {"v", cur.v}, {"u0", cur.u0}};
      const fs::path p = out / "checkpoints" / step_name(cur.step);
      save_checkpoint(p, c);
      result.checkpoints.push_back(p);
    });
  }

  result.sweep = invariant_sweep(result.trajectory, cfg.s);
  result.rows = result.sweep.rows;
  if (rs.resumed && !result.rows.empty()) result.rows.erase(result.rows.begin());
  write_csv(out / "series.csv", result.rows);
  write_plots(out / "plots", result.rows);
  for (const auto& f : result.sweep.flags) log << "  warning: " << f << "\n";

  if (cfg.diagnostics) {
    const double M = cfg.ball_factor * hs_norm(rs.start.u0, cfg.s);
    result.constants = probe_all(rs.start.u0, probe_settings(cfg), cfg.probe_trials, cfg.seed, M, cfg.window_T);
    write_constants(out / "constants.json", *result.constants);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  log << "run: done in " << fmt(wall) << " s, " << result.rows.size() << " rows, " << result.checkpoints.size()
      << " checkpoints -> " << out.string() << "\n";
  return result;
}

bool VerifyResult::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

ProbeSettings probe_settings(const SolverConfig& cfg) {
  ProbeSettings st;
  st.dim = cfg.n;
  st.grid_n = cfg.N;
  st.s = cfg.s;
  return st;
}

ConstantsReport probe(const SolverConfig& cfg, std::ostream& log) {
  validate(cfg);
  make_dirs(cfg.output_dir);
  const ResolvedStart rs = resolve_start(cfg);
  const double M = cfg.ball_factor * hs_norm(rs.start.u0, cfg.s);
  ConstantsReport r = probe_all(rs.start.u0, probe_settings(cfg), cfg.probe_trials, cfg.seed, M, cfg.window_T);
  for (const auto& p : r.probes)
    log << "  " << to_string(p.lemma) << ": max ratio " << p.max_ratio << ", constant " << p.constant << "\n";
  log << "  C_lip: " << r.constants.C_lip << "\n"
      << "  contraction constant at M=" << fmt(M) << ", T=" << cfg.window_T << ": " << r.theorem.contraction_constant
      << (r.theorem.ball_condition ? " (ball condition holds)" : " (ball condition fails)") << "\n";
  const fs::path p = fs::path(cfg.output_dir) / "constants.json";
  write_constants(p, r);
  log << "probe: wrote " << p.string() << "\n";
  return r;
}

namespace {

struct Verifier {
  const SolverConfig& cfg;
  std::ostream& log;
  VerifyResult result;

  void add(std::string name, bool ok, std::string detail) {
    log << (ok ? "  PASS " : "  FAIL ") << name << ": " << detail << "\n";
    result.checks.push_back({std::move(name), ok, std::move(detail)});
  }

  void bounds() {
    const ProbeSettings st = probe_settings(cfg);
    TheoremConstants c;
    if (!cfg.constants_file.empty()) {
      c = read_constants(cfg.constants_file);
      log << "verify: constants from " << cfg.constants_file << "\n";
    } else {
      const SpectralField u0 = initial_velocity("taylor_green", cfg.n, cfg.N);
      c = probe_all(u0, st, cfg.probe_trials, cfg.seed, 1.0, cfg.window_T).constants;
      log << "verify: probed constants with " << cfg.probe_trials << " trials\n";
    }
    const std::pair<LemmaId, double> held[] = {{LemmaId::Bilinear, c.C1},      {LemmaId::Trilinear, c.C2},
                                               {LemmaId::Projection, c.C3},    {LemmaId::ProjectionLip, c.C3_prime},
                                               {LemmaId::Composition, c.C6},   {LemmaId::Gronwall, c.C4},
                                               {LemmaId::Difference, c.C5}};
    for (const auto& [lemma, constant] : held) {
      const bool transport = lemma == LemmaId::Gronwall || lemma == LemmaId::Difference;
      const int trials = transport ? 20 : cfg.probe_trials;
      const BoundCheck b = check_bound(lemma, constant, trials, cfg.seed, st);
      std::string detail = "constant " + fmt(constant) + ", " + std::to_string(trials) + " held-out trials, worst margin " +
                           fmt(b.worst_margin);
      if (!b.passed())
        detail += ", " + std::to_string(b.violations) + " violations (first seed " + std::to_string(*b.violating_seed) + ")";
      add("bound " + to_string(lemma), b.passed(), detail);
    }
    const double skew = probe_constant(LemmaId::SkewL2, 20, cfg.seed, st).max_ratio;
    add("L2 skew-symmetry", skew < 1e-10, "max ratio " + fmt(skew));
  }

  SolverConfig bench(const std::string& ic) const {
    SolverConfig b = cfg;
    b.initial_condition = ic;
    return b;
  }

  void exact(const std::string& ic) {
    const SolverConfig b = bench(ic);
    const SpectralField u0 = initial_velocity(ic, b.n, b.N, b.seed);
    const Trajectory traj = advance_windows(u0, b, b.total_T);
    double u_err = 0.0, eta_err = 0.0;
    for (std::size_t j = 0; j < traj.size(); ++j) u_err = std::max(u_err, rel_l2(traj.u.samples[j], u0));
    const ELState ex = exact_solution(ic, traj.time(traj.size() - 1), b.n, b.N);
    eta_err = l2_norm(traj.eta.back() - ex.eta) / std::max(1.0, l2_norm(ex.eta));
    add(ic + ": u stays u0", u_err < 1e-5, "max relative L2 " + fmt(u_err));
    add(ic + ": eta matches exact", eta_err < 1e-5, "relative L2 at T " + fmt(eta_err));
    sweep(ic, traj, b.n == 2);
  }

  void sweep(const std::string& ic, const Trajectory& traj, bool with_classical) {
    SweepTolerances tol;
    if (!with_classical) tol.classical = INFINITY;
    const InvariantReport rep = invariant_sweep(traj, cfg.s, tol);
    std::string detail = "div " + fmt(rep.max_div) + ", energy drift " + fmt(rep.max_energy_drift) + ", det " +
                         fmt(rep.max_det) + ", weber " + fmt(rep.max_weber) + ", classical " + fmt(rep.max_classical);
    for (const auto& f : rep.flags) detail += "; " + f;
    add(ic + ": invariant sweep", rep.clean(), detail);
  }

  // The perturbed benchmark is evaluated at t = 0.25 (or total_T if shorter).
  void oracle() {
    SolverConfig b = bench("tg_perturbed");
    b.total_T = std::min(b.total_T, b.dt * static_cast<double>(whole_steps(0.25, b.dt, "benchmark horizon")));
    const SpectralField u0 = initial_velocity("tg_perturbed", b.n, b.N, b.seed);
    const Trajectory traj = advance_windows(u0, b, b.total_T);
    const FieldSeries ref = classical_solve(u0, b.dt, b.total_T);
    const double diff = rel_l2(traj.u.back(), ref.back());
    add("tg_perturbed: EL vs vorticity oracle", diff < 1e-4, "relative L2 at T " + fmt(diff));
    double ratio = 0.0;
    int halvings = 0;
    for (const auto& w : traj.windows) {
      if (!std::isnan(w.max_ratio)) ratio = std::max(ratio, w.max_ratio);
      halvings += w.halvings;
    }
    add("tg_perturbed: contraction", ratio < 0.9 && halvings == 0,
        "max ratio " + fmt(ratio) + ", halvings " + std::to_string(halvings));
    sweep("tg_perturbed", traj, true);
  }
};

}  // namespace

VerifyResult verify(const SolverConfig& cfg, std::ostream& log) {
  validate(cfg);
  if (cfg.scheme == Scheme::ClassicalOracle) throw ConfigError("verify needs scheme u_scheme or a_scheme");
  const auto wall0 = std::chrono::steady_clock::now();
  Verifier v{cfg, log, {}};
  log << "verify: n=" << cfg.n << " N=" << cfg.N << " s=" << cfg.s << " scheme=" << to_string(cfg.scheme) << "\n";
  if (cfg.n == 2) {
    v.bounds();
    v.exact("shear");
    v.exact("taylor_green");
    v.oracle();
  } else {
    v.exact("shear");
    v.exact("translation:0.3,-0.2,0.1");
    v.exact("abc");
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  int failed = 0;
  for (const auto& c : v.result.checks) failed += c.passed ? 0 : 1;
  log << "verify: " << v.result.checks.size() - failed << "/" << v.result.checks.size() << " checks passed in "
      << fmt(wall) << " s\n";
  return v.result;
}

}  // namespace eleuler
