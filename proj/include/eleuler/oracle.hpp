#pragma once

#include "eleuler/el_core.hpp"
#include "eleuler/spectral_field.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace eleuler {

/// 2D vorticity omega = d1 u2 - d2 u1 plus the (conserved) mean velocity,
/// which the vorticity does not see.
struct VorticityState {
  SpectralField omega;
  double time = 0.0;
  std::array<double, 2> mean_velocity{0.0, 0.0};
};

VorticityState vorticity_from_velocity(const SpectralField& u, double time = 0.0);
/// u_hat = i (k2, -k1) omega_hat / |k|^2 plus the mean.
SpectralField velocity_from_vorticity(const VorticityState& w);

/// One RK4 step of d_t omega + (u.grad) omega = 0 (dealiased); throws
/// SolverError on CFL violation.
VorticityState classical_step(const VorticityState& w, double dt);

/// Velocity at every step on [0, T] from the vorticity solver.
FieldSeries classical_solve(const SpectralField& u0, double dt, double T);

/// Particle paths X(y, t) and Jacobians grad X on a uniform label grid.
struct TrajectoryEnsemble {
  int dim = 0;
  int label_n = 0;
  /// labels (points x dim).
  Eigen::ArrayXXd labels;
  std::vector<double> times;
  /// positions[t] (points x dim), unwrapped.
  std::vector<Eigen::ArrayXXd> positions;
  /// jacobians[t] (points x dim*dim), row-major: column i*dim + j = dX_i/dy_j.
  std::vector<Eigen::ArrayXXd> jacobians;

  double max_det_deviation() const;
};

/// RK4 for dX/dt = u(X, t) and d(grad X)/dt = grad u(X, t) grad X from
/// X(y, t0) = y. Velocity times come from the series (steady series are
/// evaluated at any time). Records every `stride`-th step of size dt.
TrajectoryEnsemble integrate_trajectories(const FieldSeries& u, int label_n, double t0, double T, double dt,
                                          int stride = 1);

struct BackToLabels {
  /// eta = A - id wrapped to (-pi, pi] per component.
  SpectralField eta;
  int flagged_nodes = 0;
  /// max |X(A(x)) - x| after Newton (periodic distance).
  double max_residual = 0.0;
};

/// Inverts y -> X(y, t) at every node of an N^dim grid by Newton iteration
/// seeded from the nearest forward image. Tolerance 1e-10, 25 iterations.
BackToLabels back_to_labels_from_trajectories(const TrajectoryEnsemble& ens, std::size_t time_index, int grid_n);

/// Names accepted by exact_solution and initial_velocity.
std::vector<std::string> catalog_names();
bool is_catalog_name(const std::string& name);

/// Initial velocity for a catalog key:
///   zero, shear (= shear:sin), shear:cos, shear:sin2, taylor_green,
///   translation:c1,c2[,c3], tg_perturbed, random, shear3, abc.
SpectralField initial_velocity(const std::string& name, int dim, int grid_n, std::uint64_t seed = 1);

/// Analytic (or, for taylor_green and abc, trajectory-derived) u, eta, v at
/// time t for the steady catalog flows. tg_perturbed and random have no
/// closed form and are rejected.
ELState exact_solution(const std::string& name, double t, int dim, int grid_n);

/// Pressure of the steady catalog flows (taylor_green, abc, shear, zero,
/// translation).
SpectralField exact_pressure(const std::string& name, int dim, int grid_n);

}  // namespace eleuler
