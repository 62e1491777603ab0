#include "eleuler/diagnostics.hpp"

#include "eleuler/el_core.hpp"
#include "eleuler/errors.hpp"
#include "eleuler/oracle.hpp"
#include "eleuler/parallel.hpp"
#include "eleuler/spectral_ops.hpp"
#include "eleuler/transport.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace eleuler {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream + 0x632BE59BD9B4E5ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double ratio_of(double lhs, double rhs) { return rhs > 0.0 ? lhs / rhs : 0.0; }

// Sampled inputs shared by the probe and the held-out check.
class TrialFields {
 public:
  TrialFields(std::uint64_t seed, const ProbeSettings& st) : seed_(seed), st_(st), spectrum_(st.effective_spectrum()) {}

  SpectralField vector(std::uint64_t stream, bool solenoidal) const {
    return st_.amplitude *
           random_field(st_.dim, st_.grid_n, st_.dim, spectrum_, mix(seed_, stream), solenoidal);
  }
  SpectralField velocity(std::uint64_t stream) const {
    SpectralField u = vector(stream, true);
    const double m = max_abs(u);
    return m > 0.0 ? (st_.speed / m) * u : u;
  }
  double uniform(std::uint64_t stream, double lo, double hi) const {
    std::mt19937_64 rng(mix(seed_, stream));
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }

 private:
  std::uint64_t seed_;
  const ProbeSettings& st_;
  Spectrum spectrum_;
};

// Outcome of one trial: the smallest admissible constant and a test of a
// given constant.
struct TrialOutcome {
  ProbeSample sample;
  double worst_margin = 1.0;  // for the constant under test
  bool holds = true;
};

// Linear-in-constant bound lhs <= C rhs.
void linear_verdict(TrialOutcome& out, std::optional<double> constant) {
  if (!constant) return;
  const double bound = *constant * out.sample.rhs_without_constant;
  if (out.sample.lhs == 0.0) return;  // vacuous
  out.holds = out.sample.lhs <= bound;
  out.worst_margin = bound > 0.0 ? 1.0 - out.sample.lhs / bound : -std::numeric_limits<double>::infinity();
}

FieldSeries interpolated_velocity(const SpectralField& a, const SpectralField& b, int steps, double dt) {
  std::vector<SpectralField> us;
  us.reserve(static_cast<std::size_t>(steps) + 1);
  for (int j = 0; j <= steps; ++j) {
    const double w = static_cast<double>(j) / steps;
    us.push_back((1.0 - w) * a + w * b);
  }
  return FieldSeries(0.0, dt, std::move(us));
}

double sup_norm(const FieldSeries& f, double s) {
  double m = 0.0;
  for (const auto& x : f.samples) m = std::max(m, hs_norm(x, s));
  return m;
}

TransportProblem make_problem(FieldSeries u, SpectralField f0, bool forced, const ProbeSettings& st) {
  TransportProblem p;
  p.velocity = std::move(u);
  p.initial = std::move(f0);
  p.forcing = forced ? Forcing::minus_velocity() : Forcing::zero();
  p.horizon = st.horizon;
  p.dt = st.dt;
  p.sobolev_s = st.s;
  return p;
}

TrialOutcome gronwall_trial(std::uint64_t seed, const ProbeSettings& st, std::optional<double> constant) {
  const TrialFields tf(seed, st);
  const int steps = static_cast<int>(std::llround(st.horizon / st.dt));
  const bool forced = seed % 2 == 1;
  const FieldSeries u = interpolated_velocity(tf.velocity(0), tf.velocity(1), steps, st.dt);
  const FieldSeries f = solve_galerkin(make_problem(u, tf.vector(2, false), forced, st));
  const double u_norm = sup_norm(u, st.s);
  const double g_norm = forced ? u_norm : 0.0;
  const double f0 = hs_norm(f.front(), st.s);

  TrialOutcome out;
  out.sample.lemma = LemmaId::Gronwall;
  out.sample.rhs_without_constant = 1.0;
  double c_min = 0.0;
  for (std::size_t j = 1; j < f.samples.size(); ++j) {
    const double t = st.dt * static_cast<double>(j);
    const double lhs = hs_norm(f.samples[j], st.s);
    out.sample.lhs = std::max(out.sample.lhs, lhs);
    auto envelope = [&](double c) { return gronwall_envelope(f0, u_norm, g_norm, c, t).value; };
    if (u_norm > 0.0 && lhs > f0 + g_norm * t) {
      double lo = 0.0, hi = 1.0;
      while (envelope(hi) < lhs && hi < 1e12) hi *= 2.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (envelope(mid) >= lhs ? hi : lo) = mid;
      }
      c_min = std::max(c_min, hi);
    }
    if (constant) {
      const double bound = *constant > 0.0 ? envelope(*constant) : f0 + g_norm * t;
      if (lhs > 0.0) {
        out.worst_margin = std::min(out.worst_margin, 1.0 - lhs / bound);
        if (lhs > bound) out.holds = false;
      }
    }
  }
  out.sample.ratio = c_min;
  return out;
}

TrialOutcome difference_trial(std::uint64_t seed, const ProbeSettings& st, std::optional<double> constant) {
  const TrialFields tf(seed, st);
  const int steps = static_cast<int>(std::llround(st.horizon / st.dt));
  const bool forced = seed % 2 == 1;
  const SpectralField ua = tf.velocity(0);
  const SpectralField ub = ua + tf.uniform(9, 0.02, 0.5) * tf.velocity(1);
  const SpectralField f0 = tf.vector(2, false);
  const FieldSeries u1 = FieldSeries(0.0, st.dt, std::vector<SpectralField>(static_cast<std::size_t>(steps) + 1, ua));
  const FieldSeries u2 = FieldSeries(0.0, st.dt, std::vector<SpectralField>(static_cast<std::size_t>(steps) + 1, ub));
  const FieldSeries f1 = solve_galerkin(make_problem(u1, f0, forced, st));
  const FieldSeries f2 = solve_galerkin(make_problem(u2, f0, forced, st));
  const double du = l2_norm(ua - ub);
  double sum_norm = 0.0;
  for (std::size_t j = 0; j < f1.samples.size(); ++j) sum_norm = std::max(sum_norm, hs_norm(f1.samples[j] + f2.samples[j], st.s));

  TrialOutcome out;
  out.sample.lemma = LemmaId::Difference;
  double c_min = 0.0;
  for (std::size_t j = 1; j < f1.samples.size(); ++j) {
    const double t = st.dt * static_cast<double>(j);
    const double lhs = l2_norm(f1.samples[j] - f2.samples[j]);
    const double scale = du * t;
    if (lhs > out.sample.lhs) {
      out.sample.lhs = lhs;
      out.sample.rhs_without_constant = sum_norm * scale;
    }
    if (scale > 0.0 && sum_norm > 0.0) {
      const double c = forced ? (lhs / scale - 1.0) / sum_norm : lhs / (scale * sum_norm);
      c_min = std::max(c_min, c);
    }
    if (constant && lhs > 0.0) {
      const double bound = (*constant * sum_norm + (forced ? 1.0 : 0.0)) * scale;
      out.worst_margin = std::min(out.worst_margin, bound > 0.0 ? 1.0 - lhs / bound : -1.0);
      if (lhs > bound) out.holds = false;
    }
  }
  out.sample.ratio = c_min;
  return out;
}

SpectralField shear_displacement(const TrialFields& tf, const ProbeSettings& st, int along, double t) {
  // g = -t p e_along with p independent of x_along: volume preserving.
  SpectralField prof = tf.vector(5, false).component_field(0);
  const auto& grid = prof.grid();
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    if (grid.k(i, along) != 0) prof.coeffs()(i, 0) = 0.0;
  const double m = max_abs(prof);
  SpectralField g(prof.grid_ptr(), st.dim);
  if (m > 0.0) g.set_component(along, (-t / m) * prof);
  return g;
}

TrialOutcome composition_trial(std::uint64_t seed, const ProbeSettings& st, std::optional<double> constant) {
  const TrialFields tf(seed, st);
  const SpectralField f = tf.vector(0, false);
  const double t = tf.uniform(1, 0.05, 1.0);
  SpectralField g;
  switch (seed % 3) {
    case 0: g = shear_displacement(tf, st, 0, t); break;
    case 1: g = shear_displacement(tf, st, 1, t); break;
    default:
      g = st.dim == 2 ? exact_solution("taylor_green", t, 2, st.grid_n).eta : shear_displacement(tf, st, 2, t);
  }
  TrialOutcome out;
  out.sample.lemma = LemmaId::Composition;
  out.sample.lhs = hs_norm(compose(f, g).field, st.s);
  out.sample.rhs_without_constant =
      hs_norm(f, st.s) * std::pow(hs_norm(g, st.s) + std::pow(2.0 * std::numbers::pi, st.dim), st.s);
  out.sample.ratio = ratio_of(out.sample.lhs, out.sample.rhs_without_constant);
  linear_verdict(out, constant);
  return out;
}

TrialOutcome run_trial(LemmaId lemma, std::uint64_t seed, const ProbeSettings& st, std::optional<double> constant) {
  const TrialFields tf(seed, st);
  const double s = st.s;
  TrialOutcome out;
  out.sample.lemma = lemma;
  switch (lemma) {
    case LemmaId::Bilinear: {
      out.sample = bilinear_sample(tf.vector(0, false), tf.vector(1, false), s);
      break;
    }
    case LemmaId::Trilinear:
    case LemmaId::SkewL2: {
      const double r = lemma == LemmaId::SkewL2 ? 0.0 : s;
      out.sample = trilinear_sample(tf.vector(0, true), tf.vector(1, false), r);
      out.sample.lemma = lemma;
      break;
    }
    case LemmaId::Projection: {
      const SpectralField eta = tf.vector(0, false), v = tf.vector(1, false);
      const SpectralField w = leray_project(grad_transpose_product(eta, v));
      for (double r : {s, s - 1.0}) {
        const double lhs = hs_norm(w, r), rhs = hs_norm(eta, s) * hs_norm(v, r);
        if (ratio_of(lhs, rhs) >= ratio_of(out.sample.lhs, out.sample.rhs_without_constant)) {
          out.sample.lhs = lhs;
          out.sample.rhs_without_constant = rhs;
        }
      }
      break;
    }
    case LemmaId::ProjectionLip: {
      const SpectralField e1 = tf.vector(0, false), v1 = tf.vector(1, false);
      const SpectralField e2 = e1 + tf.uniform(4, 0.05, 1.0) * tf.vector(2, false);
      const SpectralField v2 = v1 + tf.uniform(5, 0.05, 1.0) * tf.vector(3, false);
      const double M = std::max({hs_norm(e1, s), hs_norm(e2, s), hs_norm(v1, s), hs_norm(v2, s)});
      const SpectralField w = leray_project(grad_transpose_product(e1, v1) - grad_transpose_product(e2, v2));
      for (double x : {0.0, s - 1.0}) {
        const double lhs = hs_norm(w, x), rhs = M * (hs_norm(e1 - e2, x) + hs_norm(v1 - v2, x));
        if (ratio_of(lhs, rhs) >= ratio_of(out.sample.lhs, out.sample.rhs_without_constant)) {
          out.sample.lhs = lhs;
          out.sample.rhs_without_constant = rhs;
        }
      }
      break;
    }
    case LemmaId::Gronwall: out = gronwall_trial(seed, st, constant); break;
    case LemmaId::Difference: out = difference_trial(seed, st, constant); break;
    case LemmaId::Composition: out = composition_trial(seed, st, constant); break;
  }
  if (lemma != LemmaId::Gronwall && lemma != LemmaId::Difference) {
    out.sample.ratio = ratio_of(out.sample.lhs, out.sample.rhs_without_constant);
    if (lemma != LemmaId::Composition) linear_verdict(out, constant);
  }
  out.sample.seed = seed;
  out.sample.spectrum = st.effective_spectrum().describe();
  if (!std::isfinite(out.sample.ratio) || out.sample.ratio < 0.0)
    throw SolverError("probe " + to_string(lemma) + " produced an invalid ratio");
  return out;
}

}  // namespace

std::string to_string(LemmaId id) {
  switch (id) {
    case LemmaId::Bilinear: return "C1";
    case LemmaId::Trilinear: return "C2";
    case LemmaId::SkewL2: return "L2_skew";
    case LemmaId::Projection: return "C3";
    case LemmaId::ProjectionLip: return "C3_prime";
    case LemmaId::Gronwall: return "C4";
    case LemmaId::Difference: return "C5";
    case LemmaId::Composition: return "C6";
  }
  return "?";
}

LemmaId lemma_from_string(const std::string& name) {
  for (LemmaId id : all_lemmas())
    if (to_string(id) == name) return id;
  throw ConfigError("unknown lemma id '" + name + "'");
}

const std::vector<LemmaId>& all_lemmas() {
  static const std::vector<LemmaId> ids = {LemmaId::Bilinear,      LemmaId::Trilinear, LemmaId::SkewL2,
                                           LemmaId::Projection,    LemmaId::ProjectionLip, LemmaId::Gronwall,
                                           LemmaId::Difference,    LemmaId::Composition};
  return ids;
}

Spectrum Spectrum::standard(double s, int grid_n) { return {s + 1.0, grid_n / 4}; }

std::string Spectrum::describe() const {
  std::ostringstream out;
  out << "decay=" << decay << ",cutoff=" << cutoff;
  return out.str();
}

SpectralField random_field(int dim, int grid_n, int components, const Spectrum& spectrum, std::uint64_t seed,
                           bool divergence_free) {
  if (spectrum.cutoff > grid_n / 2) throw ConfigError("random_field: cutoff exceeds N/2");
  SpectralField f(dim, grid_n, components);
  const auto& grid = f.grid();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  // Modes are visited in lexicographic k order over the cutoff cube, so a
  // seed names the same continuum field at every resolution.
  const int c0 = std::min(spectrum.cutoff, grid_n / 2 - 1);
  const int side = 2 * c0 + 1;
  int total = 1;
  for (int a = 0; a < dim; ++a) total *= side;
  std::array<int, 3> k{};
  for (int c = 0; c < components; ++c)
    for (int idx = 0; idx < total; ++idx) {
      int rest = idx;
      for (int a = dim - 1; a >= 0; --a) {
        k[a] = rest % side - c0;
        rest /= side;
      }
      // Keep one representative per +-k pair: first nonzero entry positive.
      int lead = 0;
      for (int a = 0; a < dim && lead == 0; ++a) lead = k[a];
      if (lead <= 0) continue;
      const Eigen::Index i = grid.flat_index(std::span<const int>(k.data(), dim));
      const double amp = std::pow(1.0 + grid.k_squared()(i), -0.5 * spectrum.decay);
      const Complex z = std::polar(amp, phase(rng));
      f.coeffs()(i, c) = z;
      f.coeffs()(grid.negated(i), c) = std::conj(z);
    }
  return divergence_free ? leray_project(f) : f;
}

ProbeSample bilinear_sample(const SpectralField& u, const SpectralField& v, double s) {
  ProbeSample out;
  out.lemma = LemmaId::Bilinear;
  out.lhs = hs_norm(advect(u, v), s);
  out.rhs_without_constant = hs_norm(u, s) * hs_norm(v, s + 1.0);
  out.ratio = ratio_of(out.lhs, out.rhs_without_constant);
  return out;
}

ProbeSample trilinear_sample(const SpectralField& u, const SpectralField& v, double r) {
  ProbeSample out;
  out.lemma = r == 0.0 ? LemmaId::SkewL2 : LemmaId::Trilinear;
  out.lhs = std::abs(hs_inner(advect(u, v), v, r));
  out.rhs_without_constant = hs_norm(u, r) * std::pow(hs_norm(v, r), 2);
  out.ratio = ratio_of(out.lhs, out.rhs_without_constant);
  return out;
}

ProbeSample probe_trial(LemmaId lemma, std::uint64_t seed, const ProbeSettings& settings) {
  return run_trial(lemma, seed, settings, std::nullopt).sample;
}

ProbeResult probe_constant(LemmaId lemma, int trials, std::uint64_t seed, const ProbeSettings& settings) {
  if (trials < 1) throw ConfigError("probe_constant needs at least one trial");
  ProbeResult out;
  out.lemma = lemma;
  out.samples.resize(static_cast<std::size_t>(trials));
  parallel_for(out.samples.size(), [&](std::size_t i) { out.samples[i] = probe_trial(lemma, seed + i, settings); });
  for (const auto& s : out.samples) out.max_ratio = std::max(out.max_ratio, s.ratio);
  out.constant = kSafetyMargin * out.max_ratio;
  return out;
}

BoundCheck check_bound(LemmaId lemma, double constant, int fresh_trials, std::uint64_t seed,
                       const ProbeSettings& settings) {
  BoundCheck out;
  out.lemma = lemma;
  out.constant = constant;
  out.trials = fresh_trials;
  std::vector<TrialOutcome> results(static_cast<std::size_t>(std::max(0, fresh_trials)));
  parallel_for(results.size(), [&](std::size_t i) {
    results[i] = run_trial(lemma, seed + kHeldOutSeedOffset + i, settings, constant);
  });
  for (const auto& r : results) {
    out.worst_margin = std::min(out.worst_margin, r.worst_margin);
    if (!r.holds) {
      ++out.violations;
      if (!out.violating_seed) out.violating_seed = r.sample.seed;
    }
  }
  return out;
}

double lipschitz_constant(const SpectralField& u0) {
  if (!u0.is_vector()) throw ShapeError("lipschitz_constant needs a vector field");
  const int dim = u0.dim();
  const GridField g = to_physical(gradient(u0));
  double worst = 0.0;
  Eigen::MatrixXd m(dim, dim);
  for (Eigen::Index p = 0; p < g.points(); ++p) {
    for (int c = 0; c < dim; ++c)
      for (int a = 0; a < dim; ++a) m(c, a) = g.values(p, c * dim + a);
    const Eigen::MatrixXd mtm = m.transpose() * m;
    worst = std::max(worst, std::sqrt(std::max(0.0, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(mtm).eigenvalues().maxCoeff())));
  }
  return worst;
}

ConstantsReport probe_all(const SpectralField& u0, const ProbeSettings& settings, int trials, std::uint64_t seed,
                          double M, double T) {
  ConstantsReport r;
  r.settings = settings;
  r.trials = trials;
  r.seed = seed;
  for (LemmaId id : all_lemmas()) r.probes.push_back(probe_constant(id, trials, seed, settings));
  auto constant = [&](LemmaId id) {
    for (const auto& p : r.probes)
      if (p.lemma == id) return p.constant;
    return 0.0;
  };
  TheoremConstants& c = r.constants;
  c.C1 = constant(LemmaId::Bilinear);
  c.C2 = constant(LemmaId::Trilinear);
  c.C3 = constant(LemmaId::Projection);
  c.C3_prime = constant(LemmaId::ProjectionLip);
  c.C4 = constant(LemmaId::Gronwall);
  c.C5 = constant(LemmaId::Difference);
  c.C6 = constant(LemmaId::Composition);
  c.C_lip = lipschitz_constant(u0);
  for (const auto& p : r.probes)
    if (p.lemma == LemmaId::SkewL2) r.skew_max = p.max_ratio;
  std::ostringstream prov;
  prov << trials << " trials per lemma, seeds " << seed << ".." << seed + static_cast<std::uint64_t>(trials) - 1
       << ", n=" << settings.dim << ", N=" << settings.grid_n << ", s=" << settings.s << ", spectrum "
       << settings.effective_spectrum().describe() << ", transport horizon " << settings.horizon << " dt "
       << settings.dt << " speed " << settings.speed << ", margin " << kSafetyMargin;
  c.provenance = prov.str();
  r.M = M;
  r.T = T;
  r.u0_norm = hs_norm(u0, settings.s);
  if (c.C4 > 0.0) r.theorem = theorem_constant(c, M, T, r.u0_norm);
  return r;
}

InvariantReport invariant_sweep(const Trajectory& traj, double s, const SweepTolerances& tol) {
  InvariantReport rep;
  const std::size_t count = traj.u.samples.size();
  if (count == 0) return rep;
  const bool has_labels = traj.eta.samples.size() == count;
  const bool has_virtual = has_labels && traj.v.samples.size() == count && !traj.u0.empty();
  const double dt = traj.u.dt;
  rep.rows.resize(count);
  rep.energy0 = 0.5 * std::pow(l2_norm(traj.u.samples[0]), 2);

  parallel_for(count, [&](std::size_t j) {
    const SpectralField& u = traj.u.samples[j];
    SweepRow& row = rep.rows[j];
    row.time = traj.time(j);
    row.energy = 0.5 * std::pow(l2_norm(u), 2);
    row.u_hs = hs_norm(u, s);
    row.div_residual = hs_norm(divergence(u), s - 1.0);
    row.eta_hs = has_labels ? hs_norm(traj.eta.samples[j], s) : kNaN;
    row.det_residual = has_labels ? max_det_deviation(traj.eta.samples[j]) : kNaN;
    row.weber_residual = has_virtual ? weber_residual(traj.state(j), traj.u0) : kNaN;
    if (count >= 3 && dt > 0.0) {
      SpectralField dudt;
      const auto& S = traj.u.samples;
      if (j == 0) dudt = (0.5 / dt) * (-3.0 * S[0] + 4.0 * S[1] - S[2]);
      else if (j + 1 == count) dudt = (0.5 / dt) * (3.0 * S[j] - 4.0 * S[j - 1] + S[j - 2]);
      else dudt = (0.5 / dt) * (S[j + 1] - S[j - 1]);
      row.classical_residual = euler_residual(u, dudt);
    } else if (count == 2 && dt > 0.0) {
      row.classical_residual = euler_residual(u, (1.0 / dt) * (traj.u.samples[1] - traj.u.samples[0]));
    } else {
      row.classical_residual = kNaN;
    }
    row.contraction_ratio = kNaN;
    for (const auto& w : traj.windows)
      if (row.time <= w.window.t1() + 1e-12 * std::max(1.0, w.window.t1())) {
        row.contraction_ratio = w.max_ratio;
        break;
      }
  });

  struct Column {
    const char* name;
    double limit;
    double SweepRow::*field;
    double* worst;
  };
  // Energy is flagged by relative drift; the others by value.
  std::vector<double> drift(count);
  for (std::size_t j = 0; j < count; ++j)
    drift[j] = rep.energy0 > 0.0 ? std::abs(rep.rows[j].energy - rep.energy0) / rep.energy0
                                 : std::abs(rep.rows[j].energy);
  for (std::size_t j = 0; j < count; ++j) rep.max_energy_drift = std::max(rep.max_energy_drift, drift[j]);
  if (rep.max_energy_drift > tol.energy) {
    std::ostringstream m;
    m << "energy drift " << rep.max_energy_drift << " exceeds " << tol.energy;
    rep.flags.push_back(m.str());
  }
  const Column columns[] = {{"div_residual", tol.div, &SweepRow::div_residual, &rep.max_div},
                            {"det_residual", tol.det, &SweepRow::det_residual, &rep.max_det},
                            {"weber_residual", tol.weber, &SweepRow::weber_residual, &rep.max_weber},
                            {"classical_residual", tol.classical, &SweepRow::classical_residual, &rep.max_classical}};
  for (const auto& col : columns) {
    int bad = 0;
    double first_time = 0.0;
    for (const auto& row : rep.rows) {
      const double v = row.*(col.field);
      if (std::isnan(v)) continue;
      *col.worst = std::max(*col.worst, v);
      if (v > col.limit) {
        if (bad++ == 0) first_time = row.time;
      }
    }
    if (bad > 0) {
      std::ostringstream m;
      m << col.name << " exceeds " << col.limit << " at " << bad << " times (first t = " << first_time
        << ", max " << *col.worst << ")";
      rep.flags.push_back(m.str());
    }
  }
  return rep;
}

}  // namespace eleuler
