#pragma once

#include "eleuler/transport.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace eleuler {

enum class Scheme { UScheme, AScheme, ClassicalOracle };

struct SolverConfig {
  int n = 2;
  int N = 32;
  double s = 3.0;
  Scheme scheme = Scheme::UScheme;
  TransportBackend transport_backend = TransportBackend::Galerkin;
  double dt = 1e-3;
  double total_T = 0.5;
  double window_T = 0.05;
  double fp_tol = 1e-8;
  double min_window = 1e-3;
  int max_iters = 50;
  std::string initial_condition = "taylor_green";
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  // Optional keys.
  bool diagnostics = false;
  std::string constants_file;
  int probe_trials = 100;
  /// Radius of the fixed-point ball as a multiple of |u0|_{H^s}.
  double ball_factor = 2.0;
  /// Write a checkpoint every this many windows.
  int checkpoint_every = 1;
};

/// Parses `key = value` lines ('#' starts a comment). Unknown keys and
/// malformed values throw ConfigError; the result is validated.
SolverConfig parse_config(const std::string& text);
SolverConfig load_config(const std::filesystem::path& path);

/// Checks every invariant of a configuration; throws ConfigError.
void validate(const SolverConfig& cfg);

/// Serializes in the same key = value format (round-trips through parse).
std::string to_string(const SolverConfig& cfg);

std::string to_string(Scheme scheme);
std::string to_string(TransportBackend backend);

/// Number of dt steps in a span; throws ConfigError if not a whole multiple.
int whole_steps(double span, double dt, const char* what);

}  // namespace eleuler
