#include "eleuler/config.hpp"

#include "eleuler/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace eleuler {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("key '" + key + "': expected " + expected + ", got '" + value + "'");
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) bad_value(key, value, "a real number");
  return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "an integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  bad_value(key, value, "a boolean");
}

using Setter = std::function<void(SolverConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"n", [](SolverConfig& c, const std::string& k, const std::string& v) { c.n = static_cast<int>(parse_integer(k, v)); }},
      {"N", [](SolverConfig& c, const std::string& k, const std::string& v) { c.N = static_cast<int>(parse_integer(k, v)); }},
      {"s", [](SolverConfig& c, const std::string& k, const std::string& v) { c.s = parse_real(k, v); }},
      {"scheme",
       [](SolverConfig& c, const std::string& k, const std::string& v) {
         if (v == "u_scheme") c.scheme = Scheme::UScheme;
         else if (v == "a_scheme") c.scheme = Scheme::AScheme;
         else if (v == "classical_oracle") c.scheme = Scheme::ClassicalOracle;
         else bad_value(k, v, "u_scheme, a_scheme or classical_oracle");
       }},
      {"transport_backend",
       [](SolverConfig& c, const std::string& k, const std::string& v) {
         if (v == "galerkin") c.transport_backend = TransportBackend::Galerkin;
         else if (v == "characteristics") c.transport_backend = TransportBackend::Characteristics;
         else bad_value(k, v, "galerkin or characteristics");
       }},
      {"dt", [](SolverConfig& c, const std::string& k, const std::string& v) { c.dt = parse_real(k, v); }},
      {"total_T", [](SolverConfig& c, const std::string& k, const std::string& v) { c.total_T = parse_real(k, v); }},
      {"window_T", [](SolverConfig& c, const std::string& k, const std::string& v) { c.window_T = parse_real(k, v); }},
      {"fp_tol", [](SolverConfig& c, const std::string& k, const std::string& v) { c.fp_tol = parse_real(k, v); }},
      {"min_window", [](SolverConfig& c, const std::string& k, const std::string& v) { c.min_window = parse_real(k, v); }},
      {"max_iters",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.max_iters = static_cast<int>(parse_integer(k, v)); }},
      {"initial_condition", [](SolverConfig& c, const std::string&, const std::string& v) { c.initial_condition = v; }},
      {"output_dir", [](SolverConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"seed",
       [](SolverConfig& c, const std::string& k, const std::string& v) {
         const long long seed = parse_integer(k, v);
         if (seed < 0) bad_value(k, v, "a non-negative integer");
         c.seed = static_cast<std::uint64_t>(seed);
       }},
      {"diagnostics", [](SolverConfig& c, const std::string& k, const std::string& v) { c.diagnostics = parse_bool(k, v); }},
      {"constants_file", [](SolverConfig& c, const std::string&, const std::string& v) { c.constants_file = v; }},
      {"probe_trials",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.probe_trials = static_cast<int>(parse_integer(k, v)); }},
      {"ball_factor", [](SolverConfig& c, const std::string& k, const std::string& v) { c.ball_factor = parse_real(k, v); }},
      {"checkpoint_every",
       [](SolverConfig& c, const std::string& k, const std::string& v) {
         c.checkpoint_every = static_cast<int>(parse_integer(k, v));
       }},
  };
  return table;
}

}  // namespace

int whole_steps(double span, double dt, const char* what) {
  const double ratio = span / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << what << " = " << span << " is not a positive whole multiple of dt = " << dt;
    throw ConfigError(msg.str());
  }
  return static_cast<int>(rounded);
}

SolverConfig parse_config(const std::string& text) {
  SolverConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    it->second(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

SolverConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate(const SolverConfig& c) {
  if (c.n != 2 && c.n != 3) throw ConfigError("n must be 2 or 3");
  if (c.N < 4 || c.N % 2 != 0) throw ConfigError("N must be an even integer >= 4");
  const double threshold = c.n / 2.0 + 1.0;
  if (!(c.s > threshold)) {
    std::ostringstream msg;
    msg << "s must exceed n/2 + 1 = " << threshold;
    throw ConfigError(msg.str());
  }
  if (c.scheme == Scheme::AScheme && c.s != std::floor(c.s)) throw ConfigError("a_scheme requires an integer s");
  if (c.scheme == Scheme::ClassicalOracle && c.n != 2) throw ConfigError("classical_oracle requires n = 2");
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.total_T > 0.0)) throw ConfigError("total_T must be positive");
  if (!(c.window_T > 0.0)) throw ConfigError("window_T must be positive");
  whole_steps(c.total_T, c.dt, "total_T");
  whole_steps(c.window_T, c.dt, "window_T");
  if (!(c.fp_tol > 0.0)) throw ConfigError("fp_tol must be positive");
  if (!(c.min_window > 0.0)) throw ConfigError("min_window must be positive");
  if (c.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (c.initial_condition.empty()) throw ConfigError("initial_condition must not be empty");
  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (c.probe_trials < 1) throw ConfigError("probe_trials must be at least 1");
  if (!(c.ball_factor > 1.0)) throw ConfigError("ball_factor must exceed 1");
  if (c.checkpoint_every < 1) throw ConfigError("checkpoint_every must be at least 1");
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::UScheme: return "u_scheme";
    case Scheme::AScheme: return "a_scheme";
    case Scheme::ClassicalOracle: return "classical_oracle";
  }
  return "?";
}

std::string to_string(TransportBackend backend) {
  return backend == TransportBackend::Galerkin ? "galerkin" : "characteristics";
}

std::string to_string(const SolverConfig& c) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "n = " << c.n << "\nN = " << c.N << "\ns = " << c.s << "\nscheme = " << to_string(c.scheme)
      << "\ntransport_backend = " << to_string(c.transport_backend) << "\ndt = " << c.dt << "\ntotal_T = " << c.total_T
      << "\nwindow_T = " << c.window_T << "\nfp_tol = " << c.fp_tol << "\nmin_window = " << c.min_window
      << "\nmax_iters = " << c.max_iters << "\ninitial_condition = " << c.initial_condition
      << "\noutput_dir = " << c.output_dir << "\nseed = " << c.seed << "\ndiagnostics = " << (c.diagnostics ? "true" : "false")
      << "\nprobe_trials = " << c.probe_trials << "\nball_factor = " << c.ball_factor
      << "\ncheckpoint_every = " << c.checkpoint_every << "\n";
  if (!c.constants_file.empty()) out << "constants_file = " << c.constants_file << "\n";
  return out.str();
}

}  // namespace eleuler
