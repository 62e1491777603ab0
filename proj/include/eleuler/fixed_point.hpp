#pragma once

#include "eleuler/config.hpp"
#include "eleuler/el_core.hpp"
#include "eleuler/spectral_field.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace eleuler {

/// Uniform step window [t0, t0 + steps*dt]. Start times are multiples of dt
/// (t0 = first_step * dt) so sample times agree across windows and resumes.
struct TimeWindow {
  long first_step = 0;
  int steps = 0;
  double dt = 0.0;

  double t0() const { return static_cast<double>(first_step) * dt; }
  double t1() const { return static_cast<double>(first_step + steps) * dt; }
};

/// Result of one application of the iteration map.
struct IterationState {
  int iterate_index = 0;
  FieldSeries u;
  FieldSeries eta;
  FieldSeries v;
  /// sup_t |iterate_k - iterate_{k-1}|_L2 (u for the u-scheme, eta for the
  /// A-scheme); infinity for the first iterate.
  double l2_distance = 0.0;
  /// sup_t |u_k|_{H^s}.
  double hs_sup = 0.0;
  double ball_M = 0.0;
};

struct SweepRecord {
  int iterate = 0;
  double l2_distance = 0.0;
  /// l2_distance / previous l2_distance; NaN when undefined or at roundoff.
  double ratio = 0.0;
  double hs_sup = 0.0;
};

struct WindowReport {
  TimeWindow window;
  int halvings = 0;
  std::vector<SweepRecord> sweeps;
  double ball_M = 0.0;
  bool ball_exceeded = false;
  /// Some attempt on this window had an iterate grow past the CFL limit,
  /// which counts as non-contraction.
  bool diverged = false;
  /// Largest defined contraction ratio over the accepted attempt (NaN if none).
  double max_ratio = 0.0;
  /// Global invariants at the window end.
  double energy = 0.0;
  double det_deviation = 0.0;
};

/// Converged window: u, eta, v sampled at every step of the window, plus
/// the velocity that transported the returned eta and v.
struct WindowSolution {
  FieldSeries u;
  FieldSeries eta;
  FieldSeries v;
  FieldSeries driver;
  WindowReport report;
};

/// Trajectory over [0, total_T], one sample per dt.
struct Trajectory {
  FieldSeries u;
  FieldSeries eta;
  FieldSeries v;
  SpectralField u0;
  std::vector<WindowReport> windows;

  std::size_t size() const { return u.samples.size(); }
  /// Step index times dt, so times agree with an unbroken run after resume.
  double time(std::size_t j) const {
    if (u.dt <= 0.0) return u.t0;
    return u.dt * static_cast<double>(std::llround(u.t0 / u.dt) + static_cast<long long>(j));
  }
  ELState state(std::size_t j) const { return {u.samples[j], eta.samples[j], v.samples[j], time(j)}; }
};

/// Options for the iteration schemes (extracted from a SolverConfig).
struct IterationOptions {
  double s = 3.0;
  TransportBackend backend = TransportBackend::Galerkin;
  double fp_tol = 1e-8;
  int max_iters = 50;
  double min_window = 1e-3;
  double ball_factor = 2.0;
  /// Consecutive non-contracting sweeps that trigger window halving.
  int stall_limit = 3;

  static IterationOptions from(const SolverConfig& cfg);
};

/// One application of S: transports eta (forcing -u, eta(t0) = 0) and v
/// (v(t0) = u0) under u, then Su = P[(grad eta)^T v + v] at every sample.
IterationState s_map(const FieldSeries& u, const SpectralField& u0, const TimeWindow& window,
                     const IterationOptions& opt);

/// Picard iteration of S from the constant seed u0 on one window, halving the
/// window on stalled contraction. The returned window may be shorter than
/// requested.
WindowSolution solve_u_window(const SpectralField& u0, const TimeWindow& window, const IterationOptions& opt);

/// Iteration on eta: v = u0 o (eta + id), u = P[(grad eta)^T v + v], eta'
/// transported under u. Seeds eta = 0.
WindowSolution solve_a_window(const SpectralField& u0, const TimeWindow& window, const IterationOptions& opt);

/// Single window [0, window_T] with either scheme.
WindowSolution iterate_u_scheme(const SpectralField& u0, const SolverConfig& cfg);
WindowSolution iterate_a_scheme(const SpectralField& u0, const SolverConfig& cfg);

/// State needed to continue a chained run.
struct WindowedStart {
  long step = 0;
  SpectralField u;
  SpectralField eta;
  SpectralField v;
  SpectralField u0;

  static WindowedStart fresh(const SpectralField& u0);
};

/// Called after each accepted window with the trajectory so far and the
/// state at the window end.
using WindowCallback = std::function<void(const Trajectory&, const WindowedStart&)>;

/// Chains windows until total_T: each window restarts from u at the previous
/// end with eta = 0; the global eta is eta_w + eta_prev o (id + eta_w) and v
/// is transported on from the previous end. The first stored sample is the
/// start state.
Trajectory advance_windows(const WindowedStart& start, const SolverConfig& cfg, double total_T,
                           const WindowCallback& on_window = {});
Trajectory advance_windows(const SpectralField& u0, const SolverConfig& cfg, double total_T);

/// Estimated constants of the a-priori inequalities.
struct TheoremConstants {
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C3_prime = 0.0, C4 = 0.0, C5 = 0.0, C6 = 0.0, C_lip = 0.0;
  std::string provenance;
};

struct TheoremConstantReport {
  double contraction_constant = 0.0;
  /// exp(C4 T M) |u0| (C3/C4 (exp(C4 T M) - 1) + 1).
  double ball_lhs = 0.0;
  bool ball_condition = false;
};

/// 2T[(C5(C3' M + 1)|u0| + C3' C5 M / C4) exp(C4 T M) + C3' M (1/2 - C5/C4)]
/// and the ball condition for radius M.
TheoremConstantReport theorem_constant(const TheoremConstants& c, double M, double T, double u0_norm);

}  // namespace eleuler
