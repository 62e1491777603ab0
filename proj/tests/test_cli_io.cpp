#include "doctest.h"
#include "test_support.hpp"

#include "eleuler/checkpoint.hpp"
#include "eleuler/config.hpp"
#include "eleuler/driver.hpp"
#include "eleuler/errors.hpp"
#include "eleuler/oracle.hpp"
#include "eleuler/parallel.hpp"
#include "eleuler/report.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

using namespace eleuler;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("eleuler_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the binary, returns the exit status; stderr goes to err_path.
int run_binary(const std::string& args, const fs::path& err_path) {
  const std::string cmd = std::string(EL_EULER_BIN) + " " + args + " > /dev/null 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string small_config(const fs::path& out, const std::string& ic) {
  return "n = 2\nN = 16\ns = 3\nscheme = u_scheme\ndt = 0.01\ntotal_T = 0.2\nwindow_T = 0.05\n"
         "initial_condition = " + ic + "\noutput_dir = " + out.string() + "\n";
}

SpectralField random_state(int dim, int n, unsigned seed) {
  SpectralField f(dim, n, dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Eigen::Index i = 0; i < f.modes(); ++i)
    for (int c = 0; c < dim; ++c) f.coeffs()(i, c) = Complex(u(rng), u(rng)) * std::pow(10.0, 20.0 * u(rng));
  return f;
}

}  // namespace

TEST_CASE("config parsing") {
  const SolverConfig c = parse_config(
      "# comment\n n = 2\nN=64   \ns = 3\nscheme = a_scheme\ntransport_backend = characteristics\n"
      "dt = 0.001 # trailing\ntotal_T = 0.5\nwindow_T = 0.05\nfp_tol = 1e-9\nmin_window = 0.002\nmax_iters = 20\n"
      "initial_condition = shear\noutput_dir = out/x\nseed = 7\n");
  CHECK(c.N == 64);
  CHECK(c.scheme == Scheme::AScheme);
  CHECK(c.transport_backend == TransportBackend::Characteristics);
  CHECK(c.dt == 0.001);
  CHECK(c.fp_tol == 1e-9);
  CHECK(c.max_iters == 20);
  CHECK(c.initial_condition == "shear");
  CHECK(c.seed == 7);

  const SolverConfig again = parse_config(to_string(c));
  CHECK(to_string(again) == to_string(c));

  SUBCASE("hypothesis on s") {
    try {
      parse_config("n = 2\ns = 1.5\n");
      FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("s must exceed n/2 + 1 = 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("n = 3\ns = 2.5\n"), ConfigError);
    CHECK_NOTHROW(parse_config("n = 3\ns = 2.75\n"));
  }
  SUBCASE("malformed input") {
    CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("N = 32\nN = 64\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("N = 3x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("N\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("N = 33\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("scheme = b_scheme\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("scheme = a_scheme\ns = 3.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("scheme = classical_oracle\nn = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("dt = 0.003\ntotal_T = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("dt = -1\n"), ConfigError);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/config.txt"), IoError);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  for (int dim : {2, 3}) {
    const int n = dim == 2 ? 16 : 8;
    Checkpoint c{dim, n, 3.0, 0.123456789, {}};
    c.fields = {{"u", random_state(dim, n, 1)}, {"eta", random_state(dim, n, 2)}, {"v", random_state(dim, n, 3)},
                {"u0", random_state(dim, n, 4)}};
    const std::vector<char> bytes = encode_checkpoint(c);
    const std::size_t header = 4 + 2 + 2 + 4 + 8 + 8 + 4;
    std::size_t expected = header;
    for (const auto& [name, f] : c.fields) expected += 4 + name.size() + static_cast<std::size_t>(f.modes()) * dim * 16;
    CHECK(bytes.size() == expected);
    CHECK(std::string(bytes.data(), 4) == "ELEU");

    const fs::path dir = scratch("ckpt");
    save_checkpoint(dir / "a.eleu", c);
    const Checkpoint d = load_checkpoint(dir / "a.eleu");
    CHECK(d.dim == dim);
    CHECK(d.grid_n == n);
    CHECK(d.s == 3.0);
    CHECK(d.time == c.time);
    REQUIRE(d.fields.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(d.fields[i].first == c.fields[i].first);
      CHECK(std::memcmp(d.fields[i].second.coeffs().data(), c.fields[i].second.coeffs().data(),
                        sizeof(Complex) * static_cast<std::size_t>(c.fields[i].second.coeffs().size())) == 0);
    }
    CHECK(encode_checkpoint(d) == bytes);
    CHECK(looks_like_checkpoint(dir / "a.eleu"));
  }
}

TEST_CASE("checkpoint little-endian layout") {
  SpectralField u(2, 4, 2);
  u.coeffs()(1, 0) = Complex(1.0, -2.0);
  Checkpoint c{2, 4, 3.0, 0.5, {{"u", u}}};
  const std::vector<char> b = encode_checkpoint(c);
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(b[i]); };
  CHECK(byte(4) == 1);   // version
  CHECK(byte(5) == 0);
  CHECK(byte(6) == 2);   // n
  CHECK(byte(8) == 4);   // N
  // s = 3.0 is 0x4008000000000000.
  CHECK(byte(12 + 7) == 0x40);
  CHECK(byte(12 + 6) == 0x08);
  CHECK(byte(28) == 1);  // one field
  CHECK(byte(32) == 1);  // name length
  CHECK(b[36] == 'u');
  // Mode 1, component 0: re = 1.0 (0x3FF0...), im = -2.0 (0xC000...).
  const std::size_t at = 37 + 16;
  CHECK(byte(at + 7) == 0x3F);
  CHECK(byte(at + 6) == 0xF0);
  CHECK(byte(at + 15) == 0xC0);
}

TEST_CASE("corrupt checkpoints are rejected") {
  Checkpoint c{2, 8, 3.0, 0.0, {{"u", random_state(2, 8, 5)}}};
  std::vector<char> b = encode_checkpoint(c);
  std::vector<char> bad = b;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), IoError);
  bad = b;
  bad[4] = 9;
  CHECK_THROWS_AS(decode_checkpoint(bad), IoError);
  CHECK_THROWS_AS(decode_checkpoint(std::vector<char>(b.begin(), b.end() - 1)), IoError);
  bad = b;
  bad.push_back(0);
  CHECK_THROWS_AS(decode_checkpoint(bad), IoError);
  CHECK_THROWS_AS(decode_checkpoint({}), IoError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent.eleu"), IoError);
  Checkpoint wrong{2, 8, 3.0, 0.0, {{"u", random_state(2, 16, 5)}}};
  CHECK_THROWS_AS(encode_checkpoint(wrong), ShapeError);
}

TEST_CASE("CSV schema") {
  std::vector<SweepRow> rows(2);
  rows[0] = {0.0, 0.25, 2.0, 0.0, 1e-30, 0.0, std::nan(""), 1.0 / 3.0, std::nan("")};
  rows[1] = {0.001, 0.25, 2.0, 0.002, 0.0, 1e-15, 2e-16, 0.1, 0.015};
  const std::string text = format_csv(rows);
  const std::string header = text.substr(0, text.find('\n'));
  CHECK(header == "time,energy,u_hs,eta_hs,div_residual,det_residual,weber_residual,classical_residual,contraction_ratio");
  const fs::path dir = scratch("csv");
  write_csv(dir / "s.csv", rows);
  const std::vector<SweepRow> back = read_csv(dir / "s.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].classical_residual == rows[0].classical_residual);
  CHECK(std::isnan(back[0].weber_residual));
  CHECK(back[1].contraction_ratio == 0.015);
  write_file(dir / "bad.csv", "time,energy\n0,1\n");
  CHECK_THROWS_AS(read_csv(dir / "bad.csv"), IoError);

  const std::string svg = svg_plot(rows, "energy");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK_THROWS_AS(svg_plot(rows, "pressure"), ConfigError);
}

TEST_CASE("constants JSON") {
  ConstantsReport r;
  r.constants = {0.17, 0.05, 0.2, 0.11, 0.07, 0.09, 5e-5, 1.0, "test"};
  r.trials = 3;
  const fs::path dir = scratch("json");
  write_constants(dir / "c.json", r);
  const TheoremConstants c = read_constants(dir / "c.json");
  CHECK(c.C1 == 0.17);
  CHECK(c.C3_prime == 0.11);
  CHECK(c.C6 == 5e-5);
  CHECK(c.C_lip == 1.0);
  CHECK(c.provenance == "test");
  write_file(dir / "bad.json", "{\"constants\": {\"C1\": 1}}");
  CHECK_THROWS_AS(read_constants(dir / "bad.json"), IoError);
  write_file(dir / "garbage.json", "not json");
  CHECK_THROWS_AS(read_constants(dir / "garbage.json"), IoError);
}

TEST_CASE("run writes artifacts and resumes deterministically") {
  set_thread_count(1);
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  std::ostringstream log;
  const SolverConfig cfg = parse_config(small_config(a, "tg_perturbed"));
  const RunResult full = run(cfg, log);
  CHECK(fs::exists(a / "series.csv"));
  CHECK(fs::exists(a / "plots" / "energy.svg"));
  CHECK(fs::exists(a / "config.txt"));
  CHECK(full.checkpoints.size() == 4);
  CHECK(full.rows.size() == 21);
  CHECK(read_csv(a / "series.csv").size() == 21);

  // The checkpoint holds the state at the window end.
  const Checkpoint mid = load_checkpoint(a / "checkpoints" / "step_0000010.eleu");
  CHECK(mid.time == doctest::Approx(0.1));
  CHECK((mid.field("u").coeffs() == full.trajectory.u.samples[10].coeffs()).all());
  CHECK((mid.field("eta").coeffs() == full.trajectory.eta.samples[10].coeffs()).all());

  const SolverConfig resumed = parse_config(small_config(b, (a / "checkpoints" / "step_0000010.eleu").string()));
  const RunResult rest = run(resumed, log);
  const std::string csv_a = read_file(a / "series.csv"), csv_b = read_file(b / "series.csv");
  // Skip the header and the rows up to t = 0.1.
  std::size_t pos = 0;
  for (int line = 0; line < 12; ++line) pos = csv_a.find('\n', pos) + 1;
  const std::string tail_a = csv_a.substr(pos);
  const std::string tail_b = csv_b.substr(csv_b.find('\n') + 1);
  CHECK(rest.rows.size() == 10);
  CHECK(tail_b == tail_a);
  set_thread_count(0);

  SUBCASE("classical oracle resumes too") {
    const fs::path c = scratch("run_c"), d = scratch("run_d");
    set_thread_count(1);
    std::string cc = small_config(c, "tg_perturbed");
    cc.replace(cc.find("u_scheme"), 8, "classical_oracle");
    run(parse_config(cc), log);
    std::string dc = small_config(d, (c / "checkpoints" / "step_0000010.eleu").string());
    dc.replace(dc.find("u_scheme"), 8, "classical_oracle");
    run(parse_config(dc), log);
    const std::string x = read_file(c / "series.csv"), y = read_file(d / "series.csv");
    std::size_t p = 0;
    for (int line = 0; line < 12; ++line) p = x.find('\n', p) + 1;
    CHECK(y.substr(y.find('\n') + 1) == x.substr(p));
    set_thread_count(0);
  }
  SUBCASE("mismatched checkpoint") {
    std::string text = small_config(b, (a / "checkpoints" / "step_0000010.eleu").string());
    text.replace(text.find("N = 16"), 6, "N = 32");
    CHECK_THROWS_AS(run(parse_config(text), log), ConfigError);
  }
  SUBCASE("unknown initial condition") {
    CHECK_THROWS_AS(run(parse_config(small_config(b, "no_such_flow")), log), ConfigError);
  }
}

TEST_CASE("binary exit codes") {
  const fs::path dir = scratch("bin");
  const fs::path err = dir / "stderr.txt";

  write_file(dir / "ok.conf", small_config(dir / "out", "shear"));
  CHECK(run_binary("run " + (dir / "ok.conf").string(), err) == 0);
  CHECK(fs::exists(dir / "out" / "series.csv"));
  for (const auto& row : read_csv(dir / "out" / "series.csv")) {
    CHECK(row.div_residual < 1e-5);
    CHECK(row.det_residual < 1e-5);
    CHECK(row.weber_residual < 1e-5);
    CHECK(row.classical_residual < 1e-5);
  }

  write_file(dir / "s.conf", "n = 2\ns = 1.5\n");
  CHECK(run_binary("run " + (dir / "s.conf").string(), err) == 1);
  const std::string msg = read_file(err);
  CHECK(msg.rfind("error: config: ", 0) == 0);
  CHECK(msg.find("s must exceed n/2 + 1 = 2") != std::string::npos);
  CHECK(std::count(msg.begin(), msg.end(), '\n') == 1);

  CHECK(run_binary("run " + (dir / "missing.conf").string(), err) == 3);
  CHECK(read_file(err).rfind("error: io: ", 0) == 0);

  write_file(dir / "bad_ic.eleu", "ELEU garbage");
  write_file(dir / "bad_ic.conf", small_config(dir / "out2", (dir / "bad_ic.eleu").string()));
  CHECK(run_binary("run " + (dir / "bad_ic.conf").string(), err) == 3);

  // Unresolvable fixed point: a huge velocity cannot contract at min_window.
  write_file(dir / "blowup.conf",
             "n = 2\nN = 16\ndt = 0.01\ntotal_T = 0.2\nwindow_T = 0.2\nmin_window = 0.1\n"
             "initial_condition = random\nseed = 9\noutput_dir = " + (dir / "out3").string() + "\nmax_iters = 3\n");
  CHECK(run_binary("run " + (dir / "blowup.conf").string(), err) == 2);
  CHECK(read_file(err).rfind("error: solver: ", 0) == 0);

  CHECK(run_binary("frobnicate x", err) == 1);
  CHECK(run_binary("run", err) == 1);

  // An injected constants file with a far-too-small C1 fails verification.
  ConstantsReport r;
  r.constants = {1e-6, 0.06, 0.2, 0.12, 0.07, 0.09, 6e-5, 1.0, "injected"};
  write_constants(dir / "bad_constants.json", r);
  write_file(dir / "verify.conf", "n = 2\nN = 16\ndt = 0.01\ntotal_T = 0.1\nwindow_T = 0.05\nmin_window = 0.01\n"
                                  "probe_trials = 10\noutput_dir = " + (dir / "out4").string() +
                                  "\nconstants_file = " + (dir / "bad_constants.json").string() + "\n");
  CHECK(run_binary("verify " + (dir / "verify.conf").string(), err) == 4);
  CHECK(read_file(err).find("bound C1") != std::string::npos);
  write_file(dir / "garbage.json", "{");
  write_file(dir / "verify2.conf", "n = 2\nN = 16\ndt = 0.01\ntotal_T = 0.1\nwindow_T = 0.05\nmin_window = 0.01\n"
                                   "probe_trials = 10\noutput_dir = " + (dir / "out5").string() +
                                   "\nconstants_file = " + (dir / "garbage.json").string() + "\n");
  CHECK(run_binary("verify " + (dir / "verify2.conf").string(), err) == 3);
}
