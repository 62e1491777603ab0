#include "eleuler/fixed_point.hpp"

#include "eleuler/errors.hpp"
#include "eleuler/spectral_ops.hpp"
#include "eleuler/transport.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace eleuler {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kAVolumeTolerance = 1e-5;

TransportProblem transport_problem(const FieldSeries& u, SpectralField initial, Forcing forcing,
                                   const TimeWindow& w, double s) {
  TransportProblem p;
  p.velocity = u;
  p.forcing = std::move(forcing);
  p.initial = std::move(initial);
  p.t0 = w.t0();
  p.horizon = w.steps * w.dt;
  p.dt = w.dt;
  p.sobolev_s = s;
  return p;
}

double sup_distance(const FieldSeries& a, const FieldSeries& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.samples.size(); ++j) d = std::max(d, l2_norm(a.samples[j] - b.samples[j]));
  return d;
}

double sup_hs(const FieldSeries& u, double s) {
  double m = 0.0;
  for (const auto& f : u.samples) m = std::max(m, hs_norm(f, s));
  return m;
}

FieldSeries constant_series(const SpectralField& f, const TimeWindow& w) {
  return FieldSeries(w.t0(), w.dt, std::vector<SpectralField>(static_cast<std::size_t>(w.steps) + 1, f));
}

bool all_zero(const SpectralField& f) { return (f.coeffs() == Complex(0.0, 0.0)).all(); }
bool identical(const SpectralField& a, const SpectralField& b) {
  return a.same_shape(b) && (a.coeffs() == b.coeffs()).all();
}

// Contraction bookkeeping shared by both schemes.
class SweepMonitor {
 public:
  SweepMonitor(const IterationOptions& opt, double scale) : opt_(opt), floor_(1e-13 * std::max(1.0, scale)) {}

  /// Records a sweep; returns true when the window must be halved.
  bool record(WindowReport& report, int iterate, double distance, double hs_sup) {
    double ratio = kNaN;
    if (iterate >= 2 && prev_ >= opt_.fp_tol && distance > floor_) ratio = distance / prev_;
    report.sweeps.push_back({iterate, distance, ratio, hs_sup});
    if (!std::isnan(ratio)) {
      report.max_ratio = std::isnan(report.max_ratio) ? ratio : std::max(report.max_ratio, ratio);
      stalled_ = ratio >= 1.0 ? stalled_ + 1 : 0;
    }
    if (hs_sup > report.ball_M) report.ball_exceeded = true;
    prev_ = distance;
    return stalled_ >= opt_.stall_limit;
  }

 private:
  const IterationOptions& opt_;
  double floor_;
  double prev_ = std::numeric_limits<double>::infinity();
  int stalled_ = 0;
};

TimeWindow halve(const WindowReport& report, const TimeWindow& w, const IterationOptions& opt) {
  TimeWindow next = w;
  next.steps = w.steps / 2;
  if (next.steps < 1 || next.steps * w.dt < opt.min_window * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "no contraction on a window of length " << w.steps * w.dt << " at t = " << w.t0()
        << "; halving would go below min_window = " << opt.min_window << " after " << report.halvings
        << " halvings (last ratio " << report.max_ratio << ")";
    throw SolverError(msg.str());
  }
  return next;
}

[[noreturn]] void not_converged(const WindowReport& report, const IterationOptions& opt) {
  std::ostringstream msg;
  msg << "fixed point not reached in " << opt.max_iters << " sweeps on [" << report.window.t0() << ", "
      << report.window.t1() << "]: last distance "
      << (report.sweeps.empty() ? kNaN : report.sweeps.back().l2_distance) << " (fp_tol " << opt.fp_tol << ")";
  throw SolverError(msg.str());
}

template <class Sweep>
WindowSolution iterate_window(const SpectralField& u0, TimeWindow w, const IterationOptions& opt, Sweep sweep) {
  if (w.steps < 1 || !(w.dt > 0.0)) throw SolverError("empty iteration window");
  if (w.steps * w.dt < opt.min_window * (1.0 - 1e-12)) throw SolverError("window shorter than min_window");
  int halvings = 0;
  bool diverged = false;
  for (;;) {
    WindowReport report;
    report.window = w;
    report.halvings = halvings;
    report.diverged = diverged;
    report.max_ratio = kNaN;
    report.ball_M = opt.ball_factor * hs_norm(u0, opt.s);
    SweepMonitor monitor(opt, l2_norm(u0));
    WindowSolution sol;
    if (sweep(w, report, monitor, sol)) {
      sol.report = std::move(report);
      return sol;
    }
    diverged = report.diverged;
    w = halve(report, w, opt);
    ++halvings;
  }
}

}  // namespace

IterationOptions IterationOptions::from(const SolverConfig& cfg) {
  IterationOptions o;
  o.s = cfg.s;
  o.backend = cfg.transport_backend;
  o.fp_tol = cfg.fp_tol;
  o.max_iters = cfg.max_iters;
  o.min_window = cfg.min_window;
  o.ball_factor = cfg.ball_factor;
  return o;
}

IterationState s_map(const FieldSeries& u, const SpectralField& u0, const TimeWindow& w, const IterationOptions& opt) {
  if (u.samples.size() != static_cast<std::size_t>(w.steps) + 1 && !u.steady())
    throw ShapeError("s_map: velocity samples do not match the window");
  IterationState st;
  st.eta = solve_transport(
      transport_problem(u, SpectralField::zeros_like(u0), Forcing::minus_velocity(), w, opt.s), opt.backend);
  st.v = solve_transport(transport_problem(u, u0, Forcing::zero(), w, opt.s), opt.backend);
  std::vector<SpectralField> su;
  su.reserve(st.eta.samples.size());
  for (std::size_t j = 0; j < st.eta.samples.size(); ++j) su.push_back(weber_velocity(st.eta.samples[j], st.v.samples[j]));
  st.u = FieldSeries(w.t0(), w.dt, std::move(su));
  st.hs_sup = sup_hs(st.u, opt.s);
  st.ball_M = opt.ball_factor * hs_norm(u0, opt.s);
  st.l2_distance = std::numeric_limits<double>::infinity();
  return st;
}

WindowSolution solve_u_window(const SpectralField& u0, const TimeWindow& window, const IterationOptions& opt) {
  return iterate_window(u0, window, opt, [&](const TimeWindow& w, WindowReport& report, SweepMonitor& monitor,
                                             WindowSolution& sol) {
    FieldSeries prev = constant_series(u0, w);
    for (int k = 1; k <= opt.max_iters; ++k) {
      IterationState st;
      try {
        st = s_map(prev, u0, w, opt);
      } catch (const CflError&) {
        if (k == 1) throw;
        report.diverged = true;
        return false;
      }
      st.iterate_index = k;
      st.l2_distance = sup_distance(st.u, prev);
      const bool stalled = monitor.record(report, k, st.l2_distance, st.hs_sup);
      if (st.l2_distance < opt.fp_tol) {
        sol.u = std::move(st.u);
        sol.eta = std::move(st.eta);
        sol.v = std::move(st.v);
        sol.driver = std::move(prev);
        return true;
      }
      if (stalled) return false;
      prev = std::move(st.u);
    }
    not_converged(report, opt);
  });
}

WindowSolution solve_a_window(const SpectralField& u0, const TimeWindow& window, const IterationOptions& opt) {
  if (opt.s != std::floor(opt.s)) throw ConfigError("a_scheme requires an integer s");
  return iterate_window(u0, window, opt, [&](const TimeWindow& w, WindowReport& report, SweepMonitor& monitor,
                                             WindowSolution& sol) {
    FieldSeries eta = constant_series(SpectralField::zeros_like(u0), w);
    for (int k = 1; k <= opt.max_iters; ++k) {
      std::vector<SpectralField> us, vs;
      us.reserve(eta.samples.size());
      vs.reserve(eta.samples.size());
      for (std::size_t j = 0; j < eta.samples.size(); ++j) {
        const SpectralField& e = eta.samples[j];
        if (all_zero(e)) {
          vs.push_back(u0);
        } else {
          Composition c = compose(u0, e);
          if (c.det_deviation > kAVolumeTolerance) {
            std::ostringstream msg;
            msg << "a_scheme iterate lost volume preservation: |det(I + grad eta) - 1| = " << c.det_deviation
                << " at t = " << eta.t0 + eta.dt * static_cast<double>(j);
            throw SolverError(msg.str());
          }
          vs.push_back(std::move(c.field));
        }
        us.push_back(weber_velocity(e, vs.back()));
      }
      FieldSeries u(w.t0(), w.dt, std::move(us));
      FieldSeries next;
      try {
        next = solve_transport(
            transport_problem(u, SpectralField::zeros_like(u0), Forcing::minus_velocity(), w, opt.s), opt.backend);
      } catch (const CflError&) {
        if (k == 1) throw;
        report.diverged = true;
        return false;
      }
      const double dist = sup_distance(next, eta);
      const bool stalled = monitor.record(report, k, dist, sup_hs(u, opt.s));
      if (dist < opt.fp_tol) {
        sol.u = u;
        sol.eta = std::move(next);
        sol.v = FieldSeries(w.t0(), w.dt, std::move(vs));
        sol.driver = std::move(u);
        return true;
      }
      if (stalled) return false;
      eta = std::move(next);
    }
    not_converged(report, opt);
  });
}

WindowSolution iterate_u_scheme(const SpectralField& u0, const SolverConfig& cfg) {
  return solve_u_window(u0, {0, whole_steps(cfg.window_T, cfg.dt, "window_T"), cfg.dt}, IterationOptions::from(cfg));
}

WindowSolution iterate_a_scheme(const SpectralField& u0, const SolverConfig& cfg) {
  return solve_a_window(u0, {0, whole_steps(cfg.window_T, cfg.dt, "window_T"), cfg.dt}, IterationOptions::from(cfg));
}

WindowedStart WindowedStart::fresh(const SpectralField& u0) {
  return {0, u0, SpectralField::zeros_like(u0), u0, u0};
}

Trajectory advance_windows(const WindowedStart& start, const SolverConfig& cfg, double total_T,
                           const WindowCallback& on_window) {
  if (cfg.scheme == Scheme::ClassicalOracle) throw ConfigError("advance_windows needs u_scheme or a_scheme");
  const IterationOptions opt = IterationOptions::from(cfg);
  const long total_steps = whole_steps(total_T, cfg.dt, "total_T");
  const int window_steps = whole_steps(cfg.window_T, cfg.dt, "window_T");
  if (start.step > total_steps) throw ConfigError("start time lies beyond total_T");

  Trajectory traj;
  traj.u0 = start.u0;
  const double t0 = static_cast<double>(start.step) * cfg.dt;
  traj.u = FieldSeries(t0, cfg.dt, {start.u});
  traj.eta = FieldSeries(t0, cfg.dt, {start.eta});
  traj.v = FieldSeries(t0, cfg.dt, {start.v});

  WindowedStart cur = start;
  while (cur.step < total_steps) {
    const int request = static_cast<int>(std::min<long>(window_steps, total_steps - cur.step));
    const TimeWindow w{cur.step, request, cfg.dt};
    WindowSolution sol =
        cfg.scheme == Scheme::AScheme ? solve_a_window(cur.u, w, opt) : solve_u_window(cur.u, w, opt);
    const TimeWindow& done = sol.report.window;

    const bool fresh_labels = all_zero(cur.eta);
    const bool fresh_virtual = identical(cur.v, cur.u);
    FieldSeries v_cont;
    if (!fresh_virtual && cfg.scheme == Scheme::UScheme)
      v_cont = solve_transport(transport_problem(sol.driver, cur.v, Forcing::zero(), done, opt.s), opt.backend);

    for (int j = 1; j <= done.steps; ++j) {
      const SpectralField& eta_w = sol.eta.samples[j];
      SpectralField eta = fresh_labels ? eta_w : eta_w + compose(cur.eta, eta_w).field;
      SpectralField v;
      if (fresh_virtual) v = sol.v.samples[j];
      else if (cfg.scheme == Scheme::UScheme) v = v_cont.samples[j];
      else v = compose(cur.v, eta_w).field;
      traj.u.samples.push_back(sol.u.samples[j]);
      traj.eta.samples.push_back(std::move(eta));
      traj.v.samples.push_back(std::move(v));
    }
    cur.step += done.steps;
    cur.u = traj.u.back();
    cur.eta = traj.eta.back();
    cur.v = traj.v.back();
    sol.report.energy = 0.5 * std::pow(l2_norm(cur.u), 2);
    sol.report.det_deviation = max_det_deviation(cur.eta);
    traj.windows.push_back(std::move(sol.report));
    if (on_window) on_window(traj, cur);
  }
  return traj;
}

Trajectory advance_windows(const SpectralField& u0, const SolverConfig& cfg, double total_T) {
  return advance_windows(WindowedStart::fresh(u0), cfg, total_T);
}

TheoremConstantReport theorem_constant(const TheoremConstants& c, double M, double T, double u0_norm) {
  TheoremConstantReport r;
  const double growth = std::exp(c.C4 * T * M);
  r.contraction_constant =
      2.0 * T *
      ((c.C5 * (c.C3_prime * M + 1.0) * u0_norm + c.C3_prime * c.C5 * M / c.C4) * growth +
       c.C3_prime * M * (0.5 - c.C5 / c.C4));
  r.ball_lhs = growth * u0_norm * (c.C3 / c.C4 * (growth - 1.0) + 1.0);
  r.ball_condition = r.ball_lhs <= M;
  return r;
}

}  // namespace eleuler
