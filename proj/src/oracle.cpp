#include "eleuler/oracle.hpp"

#include "eleuler/errors.hpp"
#include "eleuler/parallel.hpp"
#include "eleuler/spectral_ops.hpp"
#include "eleuler/transport.hpp"
#include "eleuler/trig_eval.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

namespace eleuler {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNewtonTolerance = 1e-10;
constexpr int kNewtonIterations = 25;
constexpr double kCompositionTolerance = 1e-8;

double wrap_signed(double x) { return x - kTwoPi * std::round(x / kTwoPi); }
double wrap_positive(double x) { return x - kTwoPi * std::floor(x / kTwoPi); }

void require_2d(const SpectralField& f, const char* what) {
  if (f.empty() || f.dim() != 2) throw ShapeError(std::string(what) + " is two-dimensional only");
}

SpectralField vorticity_rhs(const VorticityState& w) {
  return -advect(velocity_from_vorticity(w), w.omega);
}

// Random real divergence-free field with modes |k_i| <= 4 and zero mean.
SpectralField random_solenoidal(int dim, int grid_n, std::uint64_t seed) {
  SpectralField f(dim, grid_n, dim);
  const auto& grid = f.grid();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int cutoff = std::min(4, grid_n / 2 - 1);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (grid.k_max_abs()(i) > cutoff || grid.resolved()(i) == 0.0 || grid.k_squared()(i) == 0.0) continue;
    const double amp = 1.0 / (1.0 + grid.k_squared()(i));
    for (int c = 0; c < dim; ++c) f.coeffs()(i, c) = amp * Complex(normal(rng), normal(rng));
  }
  SpectralField sym = SpectralField::zeros_like(f);
  for (int c = 0; c < dim; ++c)
    for (Eigen::Index i = 0; i < grid.size(); ++i)
      sym.coeffs()(i, c) = 0.5 * (f.coeffs()(i, c) + std::conj(f.coeffs()(grid.negated(i), c)));
  return leray_project(sym);
}

struct ShearProfile {
  double (*f)(double);
};

std::optional<ShearProfile> shear_profile(const std::string& name) {
  if (name == "shear" || name == "shear:sin") return ShearProfile{[](double y) { return std::sin(y); }};
  if (name == "shear:cos") return ShearProfile{[](double y) { return std::cos(y); }};
  if (name == "shear:sin2") return ShearProfile{[](double y) { return std::sin(2.0 * y); }};
  return std::nullopt;
}

std::vector<double> parse_translation(const std::string& name, int dim) {
  const std::string prefix = "translation:";
  std::vector<double> c;
  std::stringstream in(name.substr(prefix.size()));
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      c.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad translation velocity '" + name + "'");
    }
  }
  if (static_cast<int>(c.size()) != dim)
    throw ConfigError("translation needs " + std::to_string(dim) + " components: '" + name + "'");
  return c;
}

bool is_translation(const std::string& name) { return name.rfind("translation:", 0) == 0; }

ELState numerical_steady_state(const SpectralField& u0, double t) {
  const int n = u0.grid_n();
  if (t == 0.0) return {u0, SpectralField::zeros_like(u0), u0, 0.0};
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / 0.01)));
  const TrajectoryEnsemble ens = integrate_trajectories(FieldSeries::steady(u0), n, 0.0, t, t / steps, steps);
  BackToLabels back = back_to_labels_from_trajectories(ens, ens.times.size() - 1, n);
  if (back.flagged_nodes > 0) throw SolverError("back-to-labels inversion failed for the catalog flow");
  SpectralField v = compose(u0, back.eta).field;
  return {u0, std::move(back.eta), std::move(v), t};
}

}  // namespace

VorticityState vorticity_from_velocity(const SpectralField& u, double time) {
  require_2d(u, "vorticity");
  if (!u.is_vector()) throw ShapeError("vorticity_from_velocity needs a vector field");
  VorticityState w;
  w.omega = derivative(u.component_field(1), 0) - derivative(u.component_field(0), 1);
  w.time = time;
  w.mean_velocity = {u.coeffs()(0, 0).real(), u.coeffs()(0, 1).real()};
  return w;
}

SpectralField velocity_from_vorticity(const VorticityState& w) {
  require_2d(w.omega, "velocity_from_vorticity");
  const auto& grid = w.omega.grid();
  SpectralField u(w.omega.grid_ptr(), 2);
  const Eigen::ArrayXd k2 = grid.k_squared();
  const Eigen::ArrayXd inv = (k2 > 0.0).select(k2.inverse(), 0.0);
  const Eigen::ArrayXd k1 = grid.wavevectors().col(0).cast<double>();
  const Eigen::ArrayXd kk2 = grid.wavevectors().col(1).cast<double>();
  const Complex i(0.0, 1.0);
  u.coeffs().col(0) = i * w.omega.coeffs().col(0) * (kk2 * inv);
  u.coeffs().col(1) = -i * w.omega.coeffs().col(0) * (k1 * inv);
  u.coeffs()(0, 0) = w.mean_velocity[0];
  u.coeffs()(0, 1) = w.mean_velocity[1];
  return u;
}

VorticityState classical_step(const VorticityState& w, double dt) {
  require_2d(w.omega, "classical_step");
  if (!(dt > 0.0)) throw SolverError("classical_step: dt must be positive");
  const double cfl = dt * max_abs(velocity_from_vorticity(w)) * w.omega.grid_n() / 2.0;
  if (cfl > kCflLimit) {
    std::ostringstream msg;
    msg << "CFL violation in the vorticity solver: " << cfl << " > " << kCflLimit;
    throw CflError(msg.str());
  }
  auto stage = [&](const SpectralField& omega) {
    VorticityState s = w;
    s.omega = omega;
    return vorticity_rhs(s);
  };
  const SpectralField k1 = vorticity_rhs(w);
  const SpectralField k2 = stage(w.omega + (0.5 * dt) * k1);
  const SpectralField k3 = stage(w.omega + (0.5 * dt) * k2);
  const SpectralField k4 = stage(w.omega + dt * k3);
  VorticityState out = w;
  out.omega.coeffs() += (dt / 6.0) * (k1.coeffs() + 2.0 * k2.coeffs() + 2.0 * k3.coeffs() + k4.coeffs());
  out.time = w.time + dt;
  if (!out.omega.coeffs().allFinite()) throw SolverError("non-finite vorticity");
  return out;
}

FieldSeries classical_solve(const SpectralField& u0, double dt, double T) {
  const int steps = static_cast<int>(std::llround(T / dt));
  VorticityState w = vorticity_from_velocity(u0);
  std::vector<SpectralField> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(velocity_from_vorticity(w));
  for (int j = 0; j < steps; ++j) {
    w = classical_step(w, dt);
    w.time = (j + 1) * dt;
    out.push_back(velocity_from_vorticity(w));
  }
  return FieldSeries(0.0, dt, std::move(out));
}

double TrajectoryEnsemble::max_det_deviation() const {
  double worst = 0.0;
  for (const auto& jac : jacobians)
    for (Eigen::Index p = 0; p < jac.rows(); ++p) {
      Eigen::MatrixXd m(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = jac(p, i * dim + j);
      worst = std::max(worst, std::abs(m.determinant() - 1.0));
    }
  return worst;
}

TrajectoryEnsemble integrate_trajectories(const FieldSeries& u, int label_n, double t0, double T, double dt,
                                          int stride) {
  if (u.samples.empty() || !u.front().is_vector()) throw ShapeError("integrate_trajectories needs vector samples");
  if (!(dt > 0.0) || stride < 1) throw SolverError("integrate_trajectories: bad step or stride");
  const int dim = u.front().dim();
  const int steps = static_cast<int>(std::llround(T / dt));
  const auto grid = WaveGrid::get(dim, label_n);
  const Eigen::Index points = grid->size();
  const int jn = dim * dim;
  const int width = dim + jn;

  TrajectoryEnsemble ens;
  ens.dim = dim;
  ens.label_n = label_n;
  ens.labels.resize(points, dim);
  Eigen::ArrayXXd X(points, dim), J = Eigen::ArrayXXd::Zero(points, jn);
  for (Eigen::Index p = 0; p < points; ++p) {
    const auto y = grid->node(p);
    for (int a = 0; a < dim; ++a) ens.labels(p, a) = X(p, a) = y[a];
    for (int a = 0; a < dim; ++a) J(p, a * dim + a) = 1.0;
  }
  ens.times.push_back(t0);
  ens.positions.push_back(X);
  ens.jacobians.push_back(J);

  auto evaluator = [&](double t) {
    const SpectralField f = u.at(t);
    const SpectralField parts[2] = {f, gradient(f)};
    return TrigEvaluator(stack(parts));
  };
  TrigEvaluator e_lo = evaluator(t0);
  for (int m = 0; m < steps; ++m) {
    const double t = t0 + m * dt;
    const TrigEvaluator e_mid = evaluator(t + 0.5 * dt);
    TrigEvaluator e_hi = evaluator(t0 + (m + 1) * dt);
    const TrigEvaluator* stages[4] = {&e_lo, &e_mid, &e_mid, &e_hi};
    parallel_for(static_cast<std::size_t>(points), [&](std::size_t idx) {
      const auto p = static_cast<Eigen::Index>(idx);
      Eigen::VectorXd x0(dim), xs(dim), dx = Eigen::VectorXd::Zero(dim);
      Eigen::MatrixXd j0(dim, dim), js(dim, dim), dj = Eigen::MatrixXd::Zero(dim, dim), gu(dim, dim);
      Eigen::VectorXd val(width);
      for (int a = 0; a < dim; ++a) x0(a) = X(p, a);
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) j0(a, b) = J(p, a * dim + b);
      Eigen::VectorXd kx = Eigen::VectorXd::Zero(dim);
      Eigen::MatrixXd kj = Eigen::MatrixXd::Zero(dim, dim);
      const double weights[4] = {1.0, 2.0, 2.0, 1.0};
      const double offsets[4] = {0.0, 0.5, 0.5, 1.0};
      for (int s = 0; s < 4; ++s) {
        xs = x0 + offsets[s] * dt * kx;
        js = j0 + offsets[s] * dt * kj;
        stages[s]->evaluate({xs.data(), static_cast<std::size_t>(dim)}, {val.data(), static_cast<std::size_t>(width)});
        for (int c = 0; c < dim; ++c)
          for (int a = 0; a < dim; ++a) gu(c, a) = val(dim + c * dim + a);
        kx = val.head(dim);
        kj = gu * js;
        dx += weights[s] * kx;
        dj += weights[s] * kj;
      }
      x0 += (dt / 6.0) * dx;
      j0 += (dt / 6.0) * dj;
      for (int a = 0; a < dim; ++a) X(p, a) = x0(a);
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) J(p, a * dim + b) = j0(a, b);
    });
    e_lo = std::move(e_hi);
    if ((m + 1) % stride == 0 || m + 1 == steps) {
      ens.times.push_back(t0 + (m + 1) * dt);
      ens.positions.push_back(X);
      ens.jacobians.push_back(J);
    }
  }
  return ens;
}

BackToLabels back_to_labels_from_trajectories(const TrajectoryEnsemble& ens, std::size_t time_index, int grid_n) {
  if (time_index >= ens.positions.size()) throw ShapeError("back_to_labels: time index out of range");
  const int dim = ens.dim;
  const int L = ens.label_n;
  const int jn = dim * dim;
  const Eigen::ArrayXXd& X = ens.positions[time_index];
  const Eigen::ArrayXXd& J = ens.jacobians[time_index];
  const Eigen::Index labels = X.rows();

  // Displacement and Jacobian as band-limited functions of the label.
  GridField carried(dim, L, dim + jn);
  carried.values.leftCols(dim) = X - ens.labels;
  carried.values.rightCols(jn) = J;
  const TrigEvaluator interp(to_spectral(carried));

  // Buckets of forward images for nearest-image seeding.
  const double h = kTwoPi / L;
  auto cell_of = [&](double x) { return static_cast<int>(std::floor(wrap_positive(x) / h)) % L; };
  Eigen::Index cells = 1;
  for (int a = 0; a < dim; ++a) cells *= L;
  std::vector<std::vector<Eigen::Index>> bucket(static_cast<std::size_t>(cells));
  for (Eigen::Index p = 0; p < labels; ++p) {
    Eigen::Index c = 0;
    for (int a = 0; a < dim; ++a) c = c * L + cell_of(X(p, a));
    bucket[static_cast<std::size_t>(c)].push_back(p);
  }

  const auto grid = WaveGrid::get(dim, grid_n);
  GridField eta(dim, grid_n, dim);
  std::vector<double> residual(static_cast<std::size_t>(grid->size()), 0.0);
  std::vector<char> flagged(static_cast<std::size_t>(grid->size()), 0);

  parallel_for(static_cast<std::size_t>(grid->size()), [&](std::size_t idx) {
    const auto node = static_cast<Eigen::Index>(idx);
    const auto x = grid->node(node);
    int home[3] = {0, 0, 0};
    for (int a = 0; a < dim; ++a) home[a] = cell_of(x[a]);
    Eigen::Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int radius = 1; best < 0 && radius <= L; ++radius) {
      const int span = 2 * radius + 1;
      int total = 1;
      for (int a = 0; a < dim; ++a) total *= span;
      for (int o = 0; o < total; ++o) {
        Eigen::Index c = 0;
        int rest = o;
        for (int a = 0; a < dim; ++a) {
          const int off = rest % span - radius;
          rest /= span;
          c = c * L + ((home[a] + off) % L + L) % L;
        }
        for (Eigen::Index p : bucket[static_cast<std::size_t>(c)]) {
          double d = 0.0;
          for (int a = 0; a < dim; ++a) d += std::pow(wrap_signed(X(p, a) - x[a]), 2);
          if (d < best_d) {
            best_d = d;
            best = p;
          }
        }
      }
    }
    Eigen::VectorXd y(dim), val(dim + jn), r(dim);
    Eigen::MatrixXd jac(dim, dim);
    for (int a = 0; a < dim; ++a) y(a) = ens.labels(best, a);
    double err = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 0; it <= kNewtonIterations; ++it) {
      interp.evaluate({y.data(), static_cast<std::size_t>(dim)}, {val.data(), static_cast<std::size_t>(dim + jn)});
      for (int a = 0; a < dim; ++a) r(a) = wrap_signed(y(a) + val(a) - x[a]);
      err = r.lpNorm<Eigen::Infinity>();
      if (err < kNewtonTolerance) {
        converged = true;
        break;
      }
      if (it == kNewtonIterations) break;
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) jac(a, b) = val(dim + a * dim + b);
      y -= jac.partialPivLu().solve(r);
    }
    residual[idx] = err;
    flagged[idx] = !converged || err > kCompositionTolerance;
    for (int a = 0; a < dim; ++a) eta.values(node, a) = wrap_signed(y(a) - x[a]);
  });

  BackToLabels out;
  out.eta = to_spectral(eta);
  for (std::size_t i = 0; i < residual.size(); ++i) {
    out.max_residual = std::max(out.max_residual, residual[i]);
    out.flagged_nodes += flagged[i];
  }
  return out;
}

std::vector<std::string> catalog_names() {
  return {"zero", "shear", "shear:sin", "shear:cos", "shear:sin2", "taylor_green", "translation:<c1>,<c2>[,<c3>]",
          "tg_perturbed", "random", "abc"};
}

bool is_catalog_name(const std::string& name) {
  return name == "zero" || shear_profile(name).has_value() || name == "taylor_green" || is_translation(name) ||
         name == "tg_perturbed" || name == "random" || name == "abc";
}

SpectralField initial_velocity(const std::string& name, int dim, int grid_n, std::uint64_t seed) {
  if (dim != 2 && dim != 3) throw ConfigError("catalog flows exist for n = 2 and n = 3 only");
  if (name == "zero") return SpectralField(dim, grid_n, dim);
  if (auto prof = shear_profile(name)) {
    return from_function(dim, grid_n, dim, [&](const double* x, double* o) {
      for (int a = 0; a < dim; ++a) o[a] = 0.0;
      o[0] = prof->f(x[1]);
    });
  }
  if (is_translation(name)) {
    const auto c = parse_translation(name, dim);
    return constant_field(dim, grid_n, c);
  }
  if (name == "taylor_green" || name == "tg_perturbed") {
    if (dim != 2) throw ConfigError("'" + name + "' is a two-dimensional flow");
    SpectralField tg = from_function(2, grid_n, 2, [](const double* x, double* o) {
      o[0] = std::sin(x[0]) * std::cos(x[1]);
      o[1] = -std::cos(x[0]) * std::sin(x[1]);
    });
    if (name == "taylor_green") return tg;
    SpectralField pert = random_solenoidal(2, grid_n, seed);
    return tg + (0.1 / l2_norm(pert)) * pert;
  }
  if (name == "random") {
    SpectralField u = random_solenoidal(dim, grid_n, seed);
    return (0.5 / max_abs(u)) * u;
  }
  if (name == "abc") {
    if (dim != 3) throw ConfigError("'abc' is a three-dimensional flow");
    return from_function(3, grid_n, 3, [](const double* x, double* o) {
      o[0] = std::sin(x[2]) + std::cos(x[1]);
      o[1] = std::sin(x[0]) + std::cos(x[2]);
      o[2] = std::sin(x[1]) + std::cos(x[0]);
    });
  }
  throw ConfigError("unknown initial condition '" + name + "'");
}

ELState exact_solution(const std::string& name, double t, int dim, int grid_n) {
  if (name == "tg_perturbed" || name == "random")
    throw ConfigError("'" + name + "' has no exact solution in the catalog");
  const SpectralField u0 = initial_velocity(name, dim, grid_n);
  if (name == "zero") return {u0, u0, u0, t};
  if (auto prof = shear_profile(name)) {
    SpectralField eta = from_function(dim, grid_n, dim, [&](const double* x, double* o) {
      for (int a = 0; a < dim; ++a) o[a] = 0.0;
      o[0] = -t * prof->f(x[1]);
    });
    return {u0, std::move(eta), u0, t};
  }
  if (is_translation(name)) {
    std::vector<double> shift = parse_translation(name, dim);
    for (double& c : shift) c = wrap_signed(-t * c);
    return {u0, constant_field(dim, grid_n, shift), u0, t};
  }
  return numerical_steady_state(u0, t);
}

SpectralField exact_pressure(const std::string& name, int dim, int grid_n) {
  if (name == "zero" || shear_profile(name) || is_translation(name)) return SpectralField(dim, grid_n, 1);
  if (name == "taylor_green") {
    if (dim != 2) throw ConfigError("'taylor_green' is a two-dimensional flow");
    return from_function(2, grid_n, 1, [](const double* x, double* o) {
      o[0] = 0.25 * (std::cos(2.0 * x[0]) + std::cos(2.0 * x[1]));
    });
  }
  if (name == "abc") {
    const SpectralField u = initial_velocity("abc", 3, grid_n);
    SpectralField p = -0.5 * dot(u, u);
    p.coeffs()(0, 0) = 0.0;
    return p;
  }
  throw ConfigError("no exact pressure for '" + name + "'");
}

}  // namespace eleuler
