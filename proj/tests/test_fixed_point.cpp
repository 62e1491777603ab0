#include "doctest.h"
#include "test_support.hpp"

#include "eleuler/errors.hpp"
#include "eleuler/fixed_point.hpp"
#include "eleuler/oracle.hpp"

#include <cmath>
#include <numbers>

using namespace eleuler;
using test_support::abs_l2;
using test_support::rel_l2;
using test_support::sample;

namespace {

SpectralField shear(int n) { return initial_velocity("shear", 2, n); }

SolverConfig small_config(int n, double dt, double window) {
  SolverConfig cfg;
  cfg.N = n;
  cfg.dt = dt;
  cfg.window_T = window;
  cfg.total_T = window;
  cfg.min_window = dt;
  return cfg;
}

double sup_rel(const FieldSeries& a, const FieldSeries& b) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.samples.size(); ++j) worst = std::max(worst, rel_l2(a.samples[j], b.samples[j]));
  return worst;
}

}  // namespace

TEST_CASE("s_map on elementary inputs") {
  const int n = 16;
  const TimeWindow w{0, 20, 0.01};
  IterationOptions opt;
  SUBCASE("zero velocity transports nothing") {
    const SpectralField u0 = initial_velocity("random", 2, n, 2);
    const FieldSeries zero(0.0, 0.01, std::vector<SpectralField>(21, SpectralField(2, n, 2)));
    const IterationState st = s_map(zero, u0, w, opt);
    for (std::size_t j = 0; j < 21; ++j) {
      CHECK(l2_norm(st.eta.samples[j]) == 0.0);
      CHECK(abs_l2(st.v.samples[j], u0) == 0.0);
      CHECK(abs_l2(st.u.samples[j], u0) < 1e-15);
    }
  }
  SUBCASE("shear is a fixed point") {
    const FieldSeries u(0.0, 0.01, std::vector<SpectralField>(21, shear(n)));
    const IterationState st = s_map(u, shear(n), w, opt);
    for (const auto& s : st.u.samples) CHECK(abs_l2(s, shear(n)) < 1e-13);
    CHECK(abs_l2(st.eta.back(), -0.2 * shear(n)) < 1e-13);
  }
  SUBCASE("initial data is pinned for any input") {
    const SpectralField u0 = initial_velocity("random", 2, n, 3);
    std::vector<SpectralField> us;
    for (int j = 0; j <= 20; ++j) us.push_back((1.0 + 0.05 * j) * initial_velocity("random", 2, n, 4));
    const IterationState st = s_map(FieldSeries(0.0, 0.01, us), u0, w, opt);
    CHECK(abs_l2(st.u.front(), u0) < 1e-12);
    CHECK(st.hs_sup >= hs_norm(u0, 3.0));
    CHECK(st.ball_M == doctest::Approx(2.0 * hs_norm(u0, 3.0)));
    for (const auto& s : st.u.samples) CHECK(l2_norm(divergence(s)) < 1e-12);
  }
  SUBCASE("compressible input is rejected") {
    const SpectralField bad = sample(2, n, 2, [](const double* x, double* o) {
      o[0] = 0.1 * std::sin(x[0]);
      o[1] = 0.0;
    });
    CHECK_THROWS_AS(s_map(FieldSeries(0.0, 0.01, std::vector<SpectralField>(21, bad)), shear(n), w, opt), SolverError);
  }
}

TEST_CASE("Taylor-Green is a fixed point of S at N = 64") {
  const int n = 64;
  const SpectralField tg = initial_velocity("taylor_green", 2, n);
  const TimeWindow w{0, 50, 1e-3};
  const IterationState st = s_map(FieldSeries(0.0, 1e-3, std::vector<SpectralField>(51, tg)), tg, w, IterationOptions{});
  double worst = 0.0;
  for (const auto& s : st.u.samples) worst = std::max(worst, abs_l2(s, tg));
  CHECK(worst < 1e-6);
}

TEST_CASE("u-scheme convergence") {
  SUBCASE("shear converges immediately") {
    SolverConfig cfg = small_config(32, 0.01, 0.2);
    cfg.fp_tol = 1e-10;
    const WindowSolution sol = iterate_u_scheme(shear(32), cfg);
    CHECK(sol.report.sweeps.size() <= 2);
    CHECK(abs_l2(sol.u.back(), shear(32)) < 1e-12);
    CHECK(abs_l2(sol.eta.back(), -0.2 * shear(32)) < 1e-12);
  }
  SUBCASE("zero initial data") {
    const WindowSolution sol = iterate_u_scheme(SpectralField(2, 16, 2), small_config(16, 0.01, 0.1));
    CHECK(sol.report.sweeps.size() == 1);
    for (std::size_t j = 0; j < sol.u.samples.size(); ++j)
      CHECK(l2_norm(sol.u.samples[j]) + l2_norm(sol.eta.samples[j]) + l2_norm(sol.v.samples[j]) == 0.0);
  }
  SUBCASE("perturbed Taylor-Green matches the classical solver") {
    const int n = 64;
    SolverConfig cfg = small_config(n, 1e-3, 0.1);
    const SpectralField u0 = initial_velocity("tg_perturbed", 2, n, 7);
    const WindowSolution sol = iterate_u_scheme(u0, cfg);
    CHECK(sol.report.halvings == 0);
    for (const auto& s : sol.report.sweeps)
      if (!std::isnan(s.ratio)) CHECK(s.ratio < 1.0);
    CHECK_FALSE(sol.report.ball_exceeded);
    const FieldSeries ref = classical_solve(u0, 1e-3, 0.1);
    CHECK(rel_l2(sol.u.back(), ref.back()) < 1e-4);
    // Fixed-point residual: one more application moves u by less than fp_tol.
    const IterationState again = s_map(sol.u, u0, sol.report.window, IterationOptions::from(cfg));
    double moved = 0.0;
    for (std::size_t j = 0; j < sol.u.samples.size(); ++j)
      moved = std::max(moved, l2_norm(again.u.samples[j] - sol.u.samples[j]));
    CHECK(moved < cfg.fp_tol);
  }
  SUBCASE("iteration budget exhausted") {
    SolverConfig cfg = small_config(32, 0.01, 0.2);
    cfg.max_iters = 2;
    CHECK_THROWS_AS(iterate_u_scheme(initial_velocity("tg_perturbed", 2, 32, 1), cfg), SolverError);
  }
}

TEST_CASE("non-contraction halves the window") {
  const int n = 16;
  IterationOptions opt;
  opt.min_window = 0.01;
  const TimeWindow w{0, 160, 0.01};
  SUBCASE("consecutive expanding sweeps") {
    opt.stall_limit = 2;
    const WindowSolution sol = solve_u_window(5.0 * initial_velocity("random", 2, n, 9), w, opt);
    CHECK(sol.report.halvings == 1);
    CHECK(sol.report.window.steps == 80);
    CHECK_FALSE(sol.report.diverged);
  }
  SUBCASE("iterates blowing past the CFL limit") {
    const WindowSolution sol = solve_u_window(6.0 * initial_velocity("random", 2, n, 9), w, opt);
    CHECK(sol.report.halvings == 1);
    CHECK(sol.report.diverged);
    CHECK(sol.u.samples.size() == 81);
  }
  SUBCASE("below min_window the run aborts") {
    opt.min_window = 1.0;
    CHECK_THROWS_AS(solve_u_window(6.0 * initial_velocity("random", 2, n, 9), w, opt), SolverError);
  }
  SUBCASE("initial data violating CFL is an error, not a halving") {
    CHECK_THROWS_AS(solve_u_window(20.0 * initial_velocity("random", 2, n, 9), w, opt), CflError);
  }
}

TEST_CASE("A-scheme") {
  SUBCASE("shear map is exact") {
    SolverConfig cfg = small_config(32, 0.01, 0.3);
    cfg.scheme = Scheme::AScheme;
    const WindowSolution sol = iterate_a_scheme(shear(32), cfg);
    for (std::size_t j = 0; j < sol.eta.samples.size(); ++j) {
      const double t = 0.01 * static_cast<double>(j);
      CHECK(abs_l2(sol.eta.samples[j], -t * shear(32)) < 1e-12);
      CHECK(abs_l2(sol.u.samples[j], shear(32)) < 1e-12);
      CHECK(abs_l2(sol.v.samples[j], shear(32)) < 1e-12);
    }
  }
  SUBCASE("zero") {
    const WindowSolution sol = iterate_a_scheme(SpectralField(2, 16, 2), small_config(16, 0.01, 0.1));
    for (const auto& e : sol.eta.samples) CHECK(l2_norm(e) == 0.0);
  }
  SUBCASE("agrees with the u-scheme") {
    const SolverConfig cfg = small_config(32, 0.005, 0.1);
    const SpectralField u0 = initial_velocity("random", 2, 32, 11);
    const WindowSolution a = iterate_a_scheme(u0, cfg);
    const WindowSolution b = iterate_u_scheme(u0, cfg);
    CHECK(sup_rel(a.u, b.u) < 1e-5);
    CHECK(sup_rel(a.v, b.v) < 1e-5);
    double eta_err = 0.0;
    for (std::size_t j = 1; j < a.eta.samples.size(); ++j) eta_err = std::max(eta_err, rel_l2(a.eta.samples[j], b.eta.samples[j]));
    CHECK(eta_err < 1e-5);
  }
  SUBCASE("fractional s is refused") {
    IterationOptions opt;
    opt.s = 2.5;
    CHECK_THROWS_AS(solve_a_window(shear(16), {0, 10, 0.01}, opt), ConfigError);
  }
}

TEST_CASE("window chaining") {
  const int n = 16;
  SUBCASE("shear over many windows composes the labels exactly") {
    SolverConfig cfg = small_config(n, 0.01, 0.25);
    const Trajectory tr = advance_windows(shear(n), cfg, 2.0);
    REQUIRE(tr.size() == 201);
    CHECK(tr.windows.size() == 8);
    for (std::size_t j : {25u, 26u, 100u, 200u}) {
      const double t = tr.time(j);
      CHECK(abs_l2(tr.eta.samples[j], -t * shear(n)) < 1e-5);
    }
    CHECK(tr.time(200) == doctest::Approx(2.0));
  }
  SUBCASE("Taylor-Green stays put") {
    const SpectralField tg = initial_velocity("taylor_green", 2, 32);
    const Trajectory tr = advance_windows(tg, small_config(32, 0.01, 0.25), 1.0);
    double worst = 0.0;
    for (const auto& u : tr.u.samples) worst = std::max(worst, rel_l2(u, tg));
    CHECK(worst < 1e-5);
    for (const auto& w : tr.windows)
      if (w.window.t1() <= 0.5 + 1e-12) CHECK(w.det_deviation < 1e-6);
    // Chained labels agree with labels from particle paths.
    CHECK(rel_l2(tr.eta.back(), exact_solution("taylor_green", 1.0, 2, 32).eta) < 1e-5);
  }
  SUBCASE("a single window reproduces iterate_u_scheme") {
    const SolverConfig cfg = small_config(n, 0.01, 0.2);
    const SpectralField u0 = initial_velocity("tg_perturbed", 2, n, 3);
    const Trajectory tr = advance_windows(u0, cfg, 0.2);
    const WindowSolution sol = iterate_u_scheme(u0, cfg);
    REQUIRE(tr.size() == sol.u.samples.size());
    CHECK((tr.u.front().coeffs() == u0.coeffs()).all());
    for (std::size_t j = 1; j < tr.size(); ++j) {
      CHECK((tr.u.samples[j].coeffs() == sol.u.samples[j].coeffs()).all());
      CHECK((tr.eta.samples[j].coeffs() == sol.eta.samples[j].coeffs()).all());
      CHECK((tr.v.samples[j].coeffs() == sol.v.samples[j].coeffs()).all());
    }
  }
  SUBCASE("chained windows track the classical solution and the Weber identity") {
    const SpectralField u0 = initial_velocity("random", 2, 32, 12);
    const Trajectory tr = advance_windows(u0, small_config(32, 0.005, 0.05), 0.2);
    const FieldSeries ref = classical_solve(u0, 0.005, 0.2);
    CHECK(rel_l2(tr.u.back(), ref.back()) < 1e-4);
    CHECK(weber_residual(tr.state(tr.size() - 1), u0) < 1e-4);
    CHECK(max_det_deviation(tr.eta.back()) < 1e-5);
  }
  SUBCASE("resuming from a window end reproduces the tail") {
    const SolverConfig cfg = small_config(n, 0.01, 0.1);
    const SpectralField u0 = initial_velocity("tg_perturbed", 2, n, 5);
    WindowedStart mid;
    int calls = 0;
    const Trajectory full = advance_windows(WindowedStart::fresh(u0), cfg, 0.3, [&](const Trajectory& t, const WindowedStart& s) {
      ++calls;
      CHECK(t.size() == static_cast<std::size_t>(s.step + 1));
      if (s.step == 10) mid = s;
    });
    CHECK(calls == 3);
    const Trajectory tail = advance_windows(mid, cfg, 0.3);
    REQUIRE(tail.size() == 21);
    for (std::size_t j = 0; j < tail.size(); ++j) {
      CHECK((tail.u.samples[j].coeffs() == full.u.samples[j + 10].coeffs()).all());
      CHECK((tail.eta.samples[j].coeffs() == full.eta.samples[j + 10].coeffs()).all());
      CHECK((tail.v.samples[j].coeffs() == full.v.samples[j + 10].coeffs()).all());
    }
  }
}

TEST_CASE("theorem constant") {
  TheoremConstants ones;
  ones.C1 = ones.C2 = ones.C3 = ones.C3_prime = ones.C4 = ones.C5 = ones.C6 = ones.C_lip = 1.0;
  CHECK(theorem_constant(ones, 1.0, 0.0, 1.0).contraction_constant == 0.0);
  const double e = std::numbers::e;
  CHECK(theorem_constant(ones, 1.0, 1.0, 1.0).contraction_constant == doctest::Approx(6.0 * e - 1.0).epsilon(1e-14));
  double prev = 0.0;
  for (double T = 0.1; T < 2.0; T += 0.1) {
    const double c = theorem_constant(ones, 1.5, T, 0.7).contraction_constant;
    CHECK(c > prev);
    prev = c;
  }
  // Ball condition: exp(TM)|u0|(exp(TM) - 1 + 1) = |u0| exp(2TM).
  const auto r = theorem_constant(ones, 2.0, 0.1, 1.0);
  CHECK(r.ball_lhs == doctest::Approx(std::exp(0.4)));
  CHECK(r.ball_condition);
  CHECK_FALSE(theorem_constant(ones, 2.0, 1.0, 1.0).ball_condition);
}
