#pragma once

#include "eleuler/fixed_point.hpp"
#include "eleuler/spectral_field.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eleuler {

/// Inequalities whose constants are estimated by sampling.
enum class LemmaId {
  Bilinear,       // |B(u,v)|_s <= C1 |u|_s |v|_{s+1}
  Trilinear,      // |(B(u,v),v)_s| <= C2 |u|_s |v|_s^2, div u = 0
  SkewL2,         // (B(u,v),v)_{L2} = 0, div u = 0
  Projection,     // |P[(grad eta)^T v]|_r <= C3 |eta|_s |v|_r, r in {s, s-1}
  ProjectionLip,  // |P[(grad e1)^T v1 - (grad e2)^T v2]|_X <= C3' M (|e1-e2|_X + |v1-v2|_X)
  Gronwall,       // transported H^s norm under the exponential envelope with C4
  Difference,     // |f1 - f2|_L2 <= C5 |f1+f2|_{s,sup} |u1-u2|_{0,sup} t (+1 when g = -u)
  Composition,    // |f o (g+id)|_s <= C6 |f|_s (|g|_s + (2 pi)^n)^s
};

std::string to_string(LemmaId id);
LemmaId lemma_from_string(const std::string& name);
const std::vector<LemmaId>& all_lemmas();

/// |coeff(k)| = (1 + |k|^2)^(-decay/2) for 0 < max|k_i| <= cutoff.
struct Spectrum {
  double decay = 4.0;
  int cutoff = 8;

  /// decay = s + 1, cutoff = N/4.
  static Spectrum standard(double s, int grid_n);
  std::string describe() const;
};

/// Real zero-mean random field with the given amplitude spectrum and uniform
/// random phases (Hermitian pairs share one phase); Leray-projected when
/// divergence_free is set. Deterministic in seed.
SpectralField random_field(int dim, int grid_n, int components, const Spectrum& spectrum, std::uint64_t seed,
                           bool divergence_free);

/// Probe resolution and transport settings.
struct ProbeSettings {
  int dim = 2;
  int grid_n = 32;
  double s = 3.0;
  std::optional<Spectrum> spectrum;
  /// Multiplies every random field; 0 gives the vacuous all-zero probes.
  double amplitude = 1.0;
  /// Transport problems (Gronwall, Difference): horizon and step.
  double horizon = 0.5;
  double dt = 0.01;
  /// max |u| of transport velocities.
  double speed = 0.5;

  Spectrum effective_spectrum() const { return spectrum ? *spectrum : Spectrum::standard(s, grid_n); }
};

struct ProbeSample {
  LemmaId lemma = LemmaId::Bilinear;
  double lhs = 0.0;
  /// Right-hand side without the constant (1 for the nonlinear envelopes,
  /// where `ratio` is the smallest admissible constant).
  double rhs_without_constant = 0.0;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  std::string spectrum;
};

struct ProbeResult {
  LemmaId lemma = LemmaId::Bilinear;
  double max_ratio = 0.0;
  /// 1.2 * max_ratio.
  double constant = 0.0;
  std::vector<ProbeSample> samples;
};

inline constexpr double kSafetyMargin = 1.2;
/// Held-out checks use seeds from this offset on.
inline constexpr std::uint64_t kHeldOutSeedOffset = 1'000'000;

/// Both sides of the bilinear bound, ||B(u,v)||_s against ||u||_s ||v||_{s+1}.
ProbeSample bilinear_sample(const SpectralField& u, const SpectralField& v, double s);
/// Both sides of the trilinear bound at index r; r = 0 is the skew identity.
ProbeSample trilinear_sample(const SpectralField& u, const SpectralField& v, double r);

/// One sampled trial of an inequality.
ProbeSample probe_trial(LemmaId lemma, std::uint64_t seed, const ProbeSettings& settings);

/// Max ratio over seeds seed .. seed + trials - 1, with the safety margin.
ProbeResult probe_constant(LemmaId lemma, int trials, std::uint64_t seed, const ProbeSettings& settings);

struct BoundCheck {
  LemmaId lemma = LemmaId::Bilinear;
  double constant = 0.0;
  int trials = 0;
  int violations = 0;
  /// min over trials of 1 - lhs / bound (1 for vacuous trials).
  double worst_margin = 1.0;
  std::optional<std::uint64_t> violating_seed;

  bool passed() const { return violations == 0; }
};

/// Asserts lhs <= bound(constant) on fresh trials with seeds
/// seed + kHeldOutSeedOffset + i. The Gronwall check tests every step time.
BoundCheck check_bound(LemmaId lemma, double constant, int fresh_trials, std::uint64_t seed,
                       const ProbeSettings& settings);

/// max over grid nodes of the spectral norm of grad u0.
double lipschitz_constant(const SpectralField& u0);

/// Probed constants plus the contraction constant for a run.
struct ConstantsReport {
  TheoremConstants constants;
  std::vector<ProbeResult> probes;
  double skew_max = 0.0;
  double M = 0.0;
  double T = 0.0;
  double u0_norm = 0.0;
  TheoremConstantReport theorem;
  ProbeSettings settings;
  int trials = 0;
  std::uint64_t seed = 0;
};

ConstantsReport probe_all(const SpectralField& u0, const ProbeSettings& settings, int trials, std::uint64_t seed,
                          double M, double T);

/// Thresholds used to flag invariant sweep rows.
struct SweepTolerances {
  double div = 1e-10;
  double energy = 1e-7;
  double det = 1e-5;
  double weber = 1e-4;
  double classical = 1e-3;
};

/// One row per stored time, columns as in the run CSV. Quantities that a
/// trajectory does not carry (eta, v) are NaN.
struct SweepRow {
  double time = 0.0;
  double energy = 0.0;
  double u_hs = 0.0;
  double eta_hs = 0.0;
  double div_residual = 0.0;
  double det_residual = 0.0;
  double weber_residual = 0.0;
  double classical_residual = 0.0;
  double contraction_ratio = 0.0;
};

struct InvariantReport {
  std::vector<SweepRow> rows;
  double energy0 = 0.0;
  double max_energy_drift = 0.0;
  double max_div = 0.0;
  double max_det = 0.0;
  double max_weber = 0.0;
  double max_classical = 0.0;
  std::vector<std::string> flags;

  bool clean() const { return flags.empty(); }
};

/// Tabulates div u (H^{s-1}), energy, det(I + grad eta) - 1, Weber and
/// classical residuals (centered in time, one-sided at the ends) and the
/// contraction ratio of the window containing each time.
InvariantReport invariant_sweep(const Trajectory& traj, double s, const SweepTolerances& tol = {});

}  // namespace eleuler
