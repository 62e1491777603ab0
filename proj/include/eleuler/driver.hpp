#pragma once

#include "eleuler/config.hpp"
#include "eleuler/diagnostics.hpp"
#include "eleuler/fixed_point.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace eleuler {

/// Initial state named by initial_condition: a catalog key or a checkpoint.
struct ResolvedStart {
  WindowedStart start;
  /// Vorticity carried by classical_oracle checkpoints (stored as (omega, 0)).
  std::optional<SpectralField> omega;
  bool resumed = false;
};
ResolvedStart resolve_start(const SolverConfig& cfg);

struct RunResult {
  Trajectory trajectory;
  InvariantReport sweep;
  /// Rows written to the CSV (the start row is omitted on resume).
  std::vector<SweepRow> rows;
  std::vector<std::filesystem::path> checkpoints;
  std::optional<ConstantsReport> constants;
};

/// Writes series.csv, plots/*.svg, checkpoints/step_<k>.eleu and, with
/// diagnostics on, constants.json under output_dir.
RunResult run(const SolverConfig& cfg, std::ostream& log);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyResult {
  std::vector<VerifyCheck> checks;
  bool passed() const;
};

/// Probes (or loads constants_file), runs the held-out bound checks, then
/// the exact and oracle benchmarks. With n = 3 only the steady catalog
/// checks run.
VerifyResult verify(const SolverConfig& cfg, std::ostream& log);

ProbeSettings probe_settings(const SolverConfig& cfg);

/// probe_all for the configured initial condition; writes constants.json.
ConstantsReport probe(const SolverConfig& cfg, std::ostream& log);

}  // namespace eleuler
