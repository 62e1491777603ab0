#pragma once

#include "eleuler/spectral_field.hpp"

namespace eleuler {

/// Volume-preservation tolerance on det(I + grad g) - 1 for compose.
inline constexpr double kComposeVolumeTolerance = 1e-4;
/// Tolerance used by check_state for the displacement of a solution.
inline constexpr double kStateVolumeTolerance = 1e-6;

/// Eulerian velocity u, back-to-labels displacement eta = A - id and
/// virtual velocity v at one time.
struct ELState {
  SpectralField u;
  SpectralField eta;
  SpectralField v;
  double time = 0.0;
};

/// Pressure and the Weber gauge potential n, both with zero mean.
struct PressurePair {
  SpectralField p;
  SpectralField n_potential;
};

/// ((grad eta)^T v)_k = sum_j d_k eta_j v_j, dealiased.
SpectralField grad_transpose_product(const SpectralField& eta, const SpectralField& v);

/// P[(grad eta)^T v + v].
SpectralField weber_velocity(const SpectralField& eta, const SpectralField& v);

/// P[(grad eta)^T d_i v - (grad v)^T d_i eta], the axis-i derivative of
/// P[(grad eta)^T v].
SpectralField weber_gradient_swap(const SpectralField& eta, const SpectralField& v, int axis);

struct Composition {
  SpectralField field;
  double det_deviation = 0.0;
  /// det(I + grad g) - 1 exceeded kComposeVolumeTolerance somewhere.
  bool volume_warning = false;
};

/// f o (g + id), evaluated exactly at the displaced grid nodes.
Composition compose(const SpectralField& f, const SpectralField& g_displacement);

/// (f_next - f_prev) / (2 dt) + (u.grad) f_now.
SpectralField material_derivative(const SpectralField& u, const SpectralField& f_now, const SpectralField& f_prev,
                                  const SpectralField& f_next, double dt);

/// Pressure from -Laplace p = div (u.grad)u at `now`, and n from
/// grad n = v + (grad eta)^T v - u.
PressurePair recover_pressure(const ELState& prev, const ELState& now, const ELState& next, double dt);

/// |du_dt + (u.grad)u + grad p|_L2 / |u|_L2 with p recovered from u
/// (0 when u vanishes).
double euler_residual(const SpectralField& u, const SpectralField& du_dt);

/// euler_residual with a centered time difference.
double classical_residual(const ELState& prev, const ELState& now, const ELState& next, double dt);

/// |v - u0 o (eta + id)|_L2 / |u0|_L2.
double weber_residual(const ELState& state, const SpectralField& u0);

/// Throws SolverError when a state breaks incompressibility or volume
/// preservation.
void check_state(const ELState& state, double s);

}  // namespace eleuler
