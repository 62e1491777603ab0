#include "eleuler/el_core.hpp"

#include "eleuler/errors.hpp"
#include "eleuler/parallel.hpp"
#include "eleuler/spectral_ops.hpp"
#include "eleuler/transport.hpp"
#include "eleuler/trig_eval.hpp"

#include <sstream>

namespace eleuler {

namespace {

void require_pair(const SpectralField& eta, const SpectralField& v, const char* op) {
  if (eta.empty() || v.empty() || !eta.is_vector() || !v.is_vector() || !eta.same_grid(v)) {
    std::ostringstream msg;
    msg << op << ": expected two vector fields on the same grid";
    throw ShapeError(msg.str());
  }
}

SpectralField pressure_from(const SpectralField& u) { return -gradient_potential(advect(u, u)); }

}  // namespace

SpectralField grad_transpose_product(const SpectralField& eta, const SpectralField& v) {
  require_pair(eta, v, "grad_transpose_product");
  const int dim = eta.dim();
  const int m = padded_size(eta.grid_n());
  const GridField grad = to_physical(gradient(eta), m);
  const GridField vp = to_physical(v, m);
  GridField out(dim, m, dim);
  for (int k = 0; k < dim; ++k)
    for (int j = 0; j < dim; ++j) out.values.col(k) += grad.values.col(j * dim + k) * vp.values.col(j);
  return to_spectral(out, eta.grid_n());
}

SpectralField weber_velocity(const SpectralField& eta, const SpectralField& v) {
  return leray_project(grad_transpose_product(eta, v) + v);
}

SpectralField weber_gradient_swap(const SpectralField& eta, const SpectralField& v, int axis) {
  require_pair(eta, v, "weber_gradient_swap");
  if (axis < 0 || axis >= eta.dim()) throw ShapeError("weber_gradient_swap: axis out of range");
  return leray_project(grad_transpose_product(eta, derivative(v, axis)) -
                       grad_transpose_product(v, derivative(eta, axis)));
}

Composition compose(const SpectralField& f, const SpectralField& g) {
  if (f.empty() || g.empty() || !g.is_vector() || !f.same_grid(g))
    throw ShapeError("compose: displacement must be a vector field on the grid of f");
  Composition out;
  out.det_deviation = max_det_deviation(g);
  out.volume_warning = out.det_deviation > kComposeVolumeTolerance;

  const int dim = f.dim();
  const int comps = f.components();
  const GridField disp = to_physical(g);
  const TrigEvaluator eval(f);
  GridField values(dim, f.grid_n(), comps);
  parallel_for(static_cast<std::size_t>(values.points()), [&](std::size_t i) {
    const auto node = static_cast<Eigen::Index>(i);
    auto x = values.node(node);
    for (int a = 0; a < dim; ++a) x[a] += disp.values(node, a);
    Eigen::VectorXd res(comps);
    eval.evaluate({x.data(), static_cast<std::size_t>(dim)}, {res.data(), static_cast<std::size_t>(comps)});
    values.values.row(node) = res.transpose().array();
  });
  out.field = to_spectral(values);
  return out;
}

SpectralField material_derivative(const SpectralField& u, const SpectralField& f_now, const SpectralField& f_prev,
                                  const SpectralField& f_next, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("material_derivative: dt must be positive");
  if (!f_now.same_shape(f_prev) || !f_now.same_shape(f_next))
    throw ShapeError("material_derivative: time samples differ in shape");
  SpectralField out = (0.5 / dt) * (f_next - f_prev);
  out += advect(u, f_now);
  return out;
}

PressurePair recover_pressure(const ELState& prev, const ELState& now, const ELState& next, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("recover_pressure: dt must be positive");
  if (!now.u.same_shape(prev.u) || !now.u.same_shape(next.u))
    throw ShapeError("recover_pressure: states differ in shape");
  require_pair(now.eta, now.v, "recover_pressure");
  PressurePair out;
  out.p = pressure_from(now.u);
  out.n_potential = gradient_potential(now.v + grad_transpose_product(now.eta, now.v) - now.u);
  return out;
}

double euler_residual(const SpectralField& u, const SpectralField& du_dt) {
  const double norm = l2_norm(u);
  if (norm == 0.0) return l2_norm(du_dt);
  SpectralField r = du_dt + advect(u, u);
  r += gradient(pressure_from(u));
  return l2_norm(r) / norm;
}

double classical_residual(const ELState& prev, const ELState& now, const ELState& next, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("classical_residual: dt must be positive");
  return euler_residual(now.u, (0.5 / dt) * (next.u - prev.u));
}

double weber_residual(const ELState& state, const SpectralField& u0) {
  const double norm = l2_norm(u0);
  const double diff = l2_norm(state.v - compose(u0, state.eta).field);
  return norm > 0.0 ? diff / norm : diff;
}

void check_state(const ELState& state, double s) {
  const double div = hs_norm(divergence(state.u), s - 1.0);
  if (div > 1e-10 * std::max(1.0, hs_norm(state.u, s))) {
    std::ostringstream msg;
    msg << "velocity lost incompressibility at t = " << state.time << " (|div u| = " << div << ")";
    throw SolverError(msg.str());
  }
  const double det = max_det_deviation(state.eta);
  if (det > kStateVolumeTolerance) {
    std::ostringstream msg;
    msg << "back-to-labels map lost volume preservation at t = " << state.time << " (|det - 1| = " << det << ")";
    throw SolverError(msg.str());
  }
}

}  // namespace eleuler
