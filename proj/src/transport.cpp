#include "eleuler/transport.hpp"

#include "eleuler/errors.hpp"
#include "eleuler/parallel.hpp"
#include "eleuler/spectral_ops.hpp"
#include "eleuler/trig_eval.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace eleuler {

namespace {

constexpr double kDivergenceTolerance = 1e-10;

// Sum_j u_j d_j f_c with u already on the padded grid.
SpectralField advect_padded(const GridField& u_padded, const SpectralField& f) {
  const int dim = f.dim();
  const int m = u_padded.samples_per_dim;
  GridField grad = to_physical(gradient(f), m);
  GridField out(dim, m, f.components());
  for (int c = 0; c < f.components(); ++c)
    for (int j = 0; j < dim; ++j) out.values.col(c) += u_padded.values.col(j) * grad.values.col(c * dim + j);
  return to_spectral(out, f.grid_n());
}

void check_finite(const SpectralField& f, double t) {
  if (!f.coeffs().allFinite()) {
    std::ostringstream msg;
    msg << "non-finite transport state at t = " << t;
    throw SolverError(msg.str());
  }
}

// Lazily padded velocity samples with linear interpolation in time.
class PaddedVelocity {
 public:
  explicit PaddedVelocity(const FieldSeries& series) : series_(series), cache_(series.samples.size()) {}

  GridField at(double t) {
    auto [lower, frac] = series_.locate(t);
    if (frac == 0.0) return sample(lower);
    if (frac == 1.0) return sample(lower + 1);
    GridField out = sample(lower);
    out.values = (1.0 - frac) * out.values + frac * sample(lower + 1).values;
    return out;
  }

 private:
  const GridField& sample(std::size_t i) {
    if (!cache_[i]) {
      const auto& u = series_.samples[i];
      cache_[i] = to_physical(u, padded_size(u.grid_n()));
    }
    return *cache_[i];
  }

  const FieldSeries& series_;
  std::vector<std::optional<GridField>> cache_;
};

SpectralField forcing_at(const TransportProblem& p, double t, const SpectralField& like) {
  switch (p.forcing.kind) {
    case Forcing::Kind::Zero:
      return SpectralField::zeros_like(like);
    case Forcing::Kind::MinusVelocity:
      return -p.velocity.at(t);
    case Forcing::Kind::Field:
      return p.forcing.field.at(t);
  }
  throw std::logic_error("unknown forcing kind");
}

}  // namespace

int TransportProblem::steps() const {
  if (dt <= 0.0) throw SolverError("transport time step must be positive");
  return static_cast<int>(std::llround(horizon / dt));
}

SpectralField advect(const SpectralField& u, const SpectralField& f) {
  if (!u.is_vector()) throw ShapeError("advect: velocity must be a vector field");
  if (!u.same_grid(f)) throw ShapeError("advect: velocity and field on different grids");
  return advect_padded(to_physical(u, padded_size(u.grid_n())), f);
}

void validate(const TransportProblem& p) {
  if (p.velocity.samples.empty()) throw ShapeError("transport problem without velocity samples");
  if (p.initial.empty()) throw ShapeError("transport problem without initial data");
  if (p.horizon < 0.0) throw SolverError("transport horizon must be non-negative");
  if (p.dt <= 0.0) throw SolverError("transport time step must be positive");
  const double last = p.t0 + p.horizon;
  if (!p.velocity.steady() &&
      (p.velocity.t0 > p.t0 + 1e-12 || p.velocity.t_end() < last - 1e-9))
    throw SolverError("velocity samples do not cover the transport window");
  double umax = 0.0;
  for (const auto& u : p.velocity.samples) {
    if (!u.is_vector() || !u.same_grid(p.initial)) throw ShapeError("velocity sample has the wrong shape");
    const double div = hs_norm(divergence(u), p.sobolev_s - 1.0);
    if (div > kDivergenceTolerance * std::max(1.0, hs_norm(u, p.sobolev_s))) {
      std::ostringstream msg;
      msg << "velocity is not divergence-free (|div u|_{H^{s-1}} = " << div << ")";
      throw SolverError(msg.str());
    }
    umax = std::max(umax, max_abs(u));
  }
  if (p.forcing.kind == Forcing::Kind::MinusVelocity && p.initial.components() != p.initial.dim())
    throw ShapeError("minus-velocity forcing needs a vector transported field");
  if (p.forcing.kind == Forcing::Kind::Field) {
    for (const auto& g : p.forcing.field.samples)
      if (!g.same_shape(p.initial)) throw ShapeError("forcing sample has the wrong shape");
  }
  const double cfl = p.dt * umax * p.initial.grid_n() / 2.0;
  if (cfl > kCflLimit) {
    std::ostringstream msg;
    msg << "CFL violation: dt*max|u|*N/2 = " << cfl << " exceeds " << kCflLimit;
    throw CflError(msg.str());
  }
}

FieldSeries solve_galerkin(const TransportProblem& p) {
  validate(p);
  const int steps = p.steps();
  PaddedVelocity velocity(p.velocity);
  auto rhs = [&](double t, const SpectralField& f) {
    SpectralField out = forcing_at(p, t, f);
    out -= advect_padded(velocity.at(t), f);
    return out;
  };
  std::vector<SpectralField> out;
  out.reserve(static_cast<size_t>(steps) + 1);
  out.push_back(p.initial);
  SpectralField f = p.initial;
  const double h = p.dt;
  for (int j = 0; j < steps; ++j) {
    const double t = p.t0 + j * h;
    const double tm = t + 0.5 * h;
    const double t1 = p.t0 + (j + 1) * h;
    SpectralField k1 = rhs(t, f);
    SpectralField k2 = rhs(tm, f + (0.5 * h) * k1);
    SpectralField k3 = rhs(tm, f + (0.5 * h) * k2);
    SpectralField k4 = rhs(t1, f + h * k3);
    f.coeffs() += (h / 6.0) * (k1.coeffs() + 2.0 * k2.coeffs() + 2.0 * k3.coeffs() + k4.coeffs());
    check_finite(f, t1);
    out.push_back(f);
  }
  return FieldSeries(p.t0, p.dt, std::move(out));
}

FieldSeries solve_characteristics(const TransportProblem& p) {
  validate(p);
  const int steps = p.steps();
  const int dim = p.initial.dim();
  const int comps = p.initial.components();
  const int n = p.initial.grid_n();
  const auto grid = p.initial.grid_ptr();
  const bool forced = p.forcing.kind != Forcing::Kind::Zero;
  const bool sampled_forcing = p.forcing.kind == Forcing::Kind::Field;
  if (comps > 16) throw ShapeError("characteristics backend supports at most 16 components");

  // foot - x and the forcing accumulated along the characteristic
  SpectralField carried(grid, dim + comps);
  const TrigEvaluator initial_eval(p.initial);

  std::vector<SpectralField> out;
  out.reserve(static_cast<size_t>(steps) + 1);
  out.push_back(p.initial);

  const double h = p.dt;
  for (int j = 0; j < steps; ++j) {
    const double t_lo = p.t0 + j * h;
    const double t_hi = p.t0 + (j + 1) * h;
    const double t_mid = t_lo + 0.5 * h;
    const TrigEvaluator u_hi(p.velocity.at(t_hi));
    const TrigEvaluator u_mid(p.velocity.at(t_mid));
    const TrigEvaluator u_lo(p.velocity.at(t_lo));
    TrigEvaluator g_hi, g_mid, g_lo;
    if (sampled_forcing) {
      g_hi = TrigEvaluator(p.forcing.field.at(t_hi));
      g_mid = TrigEvaluator(p.forcing.field.at(t_mid));
      g_lo = TrigEvaluator(p.forcing.field.at(t_lo));
    }
    const TrigEvaluator carried_eval(carried);

    GridField next_carried(dim, n, dim + comps);
    GridField value(dim, n, comps);
    parallel_for(static_cast<size_t>(grid->size()), [&](std::size_t node) {
      const auto p_node = static_cast<Eigen::Index>(node);
      const auto x = grid->node(p_node);
      double k[4][3] = {};
      double z[3];
      double g[4][16] = {};
      double foot[3];
      double state[19];
      double f0[16];
      auto eval_u = [&](const TrigEvaluator& e, const double* pt, double* res) {
        e.evaluate({pt, static_cast<size_t>(dim)}, {res, static_cast<size_t>(dim)});
      };
      auto eval_g = [&](const TrigEvaluator& e, const double* pt, double* res) {
        e.evaluate({pt, static_cast<size_t>(dim)}, {res, static_cast<size_t>(comps)});
      };
      eval_u(u_hi, x.data(), k[0]);
      if (sampled_forcing) eval_g(g_hi, x.data(), g[0]);
      for (int a = 0; a < dim; ++a) z[a] = x[a] - 0.5 * h * k[0][a];
      eval_u(u_mid, z, k[1]);
      if (sampled_forcing) eval_g(g_mid, z, g[1]);
      for (int a = 0; a < dim; ++a) z[a] = x[a] - 0.5 * h * k[1][a];
      eval_u(u_mid, z, k[2]);
      if (sampled_forcing) eval_g(g_mid, z, g[2]);
      for (int a = 0; a < dim; ++a) z[a] = x[a] - h * k[2][a];
      eval_u(u_lo, z, k[3]);
      if (sampled_forcing) eval_g(g_lo, z, g[3]);
      if (p.forcing.kind == Forcing::Kind::MinusVelocity)
        for (int s = 0; s < 4; ++s)
          for (int a = 0; a < dim; ++a) g[s][a] = -k[s][a];

      double back[3];
      for (int a = 0; a < dim; ++a) {
        back[a] = -(h / 6.0) * (k[0][a] + 2.0 * k[1][a] + 2.0 * k[2][a] + k[3][a]);
        foot[a] = x[a] + back[a];
      }
      carried_eval.evaluate({foot, static_cast<size_t>(dim)}, {state, static_cast<size_t>(dim + comps)});
      for (int a = 0; a < dim; ++a) {
        next_carried.values(p_node, a) = back[a] + state[a];
        foot[a] = x[a] + back[a] + state[a];
      }
      for (int c = 0; c < comps; ++c) {
        const double integral = forced ? (h / 6.0) * (g[0][c] + 2.0 * g[1][c] + 2.0 * g[2][c] + g[3][c]) : 0.0;
        next_carried.values(p_node, dim + c) = state[dim + c] + integral;
      }
      initial_eval.evaluate({foot, static_cast<size_t>(dim)}, {f0, static_cast<size_t>(comps)});
      for (int c = 0; c < comps; ++c) value.values(p_node, c) = f0[c] + next_carried.values(p_node, dim + c);
    });
    carried = to_spectral(next_carried);
    SpectralField f = to_spectral(value);
    check_finite(f, t_hi);
    out.push_back(std::move(f));
  }
  return FieldSeries(p.t0, p.dt, std::move(out));
}

FieldSeries solve_transport(const TransportProblem& problem, TransportBackend backend) {
  return backend == TransportBackend::Galerkin ? solve_galerkin(problem) : solve_characteristics(problem);
}

GronwallEnvelope gronwall_envelope(double norm_at_r, double u_norm, double g_norm, double c4, double span) {
  if (c4 <= 0.0) throw std::invalid_argument("gronwall_envelope: C4 must be positive");
  span = std::abs(span);
  if (u_norm == 0.0) return {norm_at_r + g_norm * span, true};
  // (a + b)e^x - b with b = g/(C4 u), written without cancellation.
  const double x = c4 * span * u_norm;
  const double growth = x == 0.0 ? 1.0 : std::expm1(x) / x;
  return {norm_at_r * std::exp(x) + g_norm * span * growth, false};
}

}  // namespace eleuler
