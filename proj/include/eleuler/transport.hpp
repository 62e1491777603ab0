#pragma once

#include "eleuler/spectral_field.hpp"

namespace eleuler {

/// Advective CFL limit enforced on dt * max|u| * N/2.
inline constexpr double kCflLimit = 0.5;

enum class TransportBackend { Galerkin, Characteristics };

/// Right-hand side g of  d_t f + (u.grad) f = g.
struct Forcing {
  enum class Kind { Zero, MinusVelocity, Field };
  Kind kind = Kind::Zero;
  FieldSeries field;

  static Forcing zero() { return {}; }
  static Forcing minus_velocity() { return {Kind::MinusVelocity, {}}; }
  static Forcing sampled(FieldSeries g) { return {Kind::Field, std::move(g)}; }
};

/// d_t f + (u.grad) f = g on [t0, t0 + horizon], f(t0) = initial.
/// velocity and forcing series use absolute times.
struct TransportProblem {
  FieldSeries velocity;
  Forcing forcing;
  SpectralField initial;
  double t0 = 0.0;
  double horizon = 0.0;
  double dt = 0.0;
  /// Sobolev index used for the divergence check (div u measured in H^{s-1}).
  double sobolev_s = 3.0;

  int steps() const;
};

/// B(u, f) = (u.grad) f, componentwise sum_j u_j d_j f_i, dealiased.
SpectralField advect(const SpectralField& u, const SpectralField& f);

/// Throws SolverError on CFL violation or non-divergence-free velocity and
/// ShapeError on incompatible fields.
void validate(const TransportProblem& problem);

/// RK4 march of the Fourier-truncated system; returns f at every step time.
FieldSeries solve_galerkin(const TransportProblem& problem);

/// Backward characteristics from every node to the previous step (RK4), with
/// the accumulated foot displacement and forcing integral carried as
/// band-limited fields; f0 is evaluated exactly at the foot.
FieldSeries solve_characteristics(const TransportProblem& problem);

FieldSeries solve_transport(const TransportProblem& problem, TransportBackend backend);

struct GronwallEnvelope {
  double value = 0.0;
  /// True when u_norm == 0 and the linear limit norm + g * span was used.
  bool degenerate = false;
};

/// (|f(r)| + |g|/(C4|u|)) exp(C4 |t-r| |u|) - |g|/(C4|u|).
GronwallEnvelope gronwall_envelope(double norm_at_r, double u_norm, double g_norm, double c4, double span);

}  // namespace eleuler
