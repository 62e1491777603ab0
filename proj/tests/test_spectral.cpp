#include "doctest.h"
#include "test_support.hpp"

#include "eleuler/errors.hpp"
#include "eleuler/parallel.hpp"
#include "eleuler/spectral_ops.hpp"
#include "eleuler/trig_eval.hpp"

#include <array>
#include <cmath>

using namespace eleuler;
using namespace test_support;

namespace {
std::array<int, 2> k2(int a, int b) { return {a, b}; }

double max_coeff_outside(const SpectralField& f, std::initializer_list<std::array<int, 2>> allowed) {
  double worst = 0.0;
  const auto& g = f.grid();
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    bool skip = false;
    for (auto k : allowed) skip = skip || (g.k(i, 0) == k[0] && g.k(i, 1) == k[1]);
    if (!skip) worst = std::max(worst, f.coeffs().row(i).abs().maxCoeff());
  }
  return worst;
}
}  // namespace

TEST_CASE("to_spectral of sin(x1) has the closed-form coefficients") {
  auto f = sample(2, 16, 1, [](const double* x, double* o) { o[0] = std::sin(x[0]); });
  auto a = k2(1, 0), b = k2(-1, 0);
  CHECK(std::abs(f.coeff(a) - Complex(0.0, -0.5)) < 1e-15);
  CHECK(std::abs(f.coeff(b) - Complex(0.0, 0.5)) < 1e-15);
  CHECK(max_coeff_outside(f, {a, b}) < 1e-15);
}

TEST_CASE("constant and cosine sums") {
  auto c = sample(2, 16, 1, [](const double*, double* o) { o[0] = 2.5; });
  CHECK(std::abs(c.coeffs()(0, 0) - 2.5) < 1e-15);
  CHECK(max_coeff_outside(c, {k2(0, 0)}) < 1e-15);

  auto f = sample(2, 16, 1, [](const double* x, double* o) { o[0] = std::cos(x[0]) + std::cos(x[1]); });
  for (auto k : {k2(1, 0), k2(-1, 0), k2(0, 1), k2(0, -1)}) CHECK(std::abs(f.coeff(k) - 0.5) < 1e-15);
  CHECK(max_coeff_outside(f, {k2(1, 0), k2(-1, 0), k2(0, 1), k2(0, -1)}) < 1e-15);
}

TEST_CASE("odd grids and wrong dimensions are configuration errors") {
  GridField odd(2, 15, 1);
  CHECK_THROWS_AS(to_spectral(odd), ConfigError);
  CHECK_THROWS_AS(SpectralField(2, 15, 1), ConfigError);
  CHECK_THROWS_AS(SpectralField(4, 16, 1), ConfigError);
}

TEST_CASE("round trip and Hermitian symmetry on random fields") {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    for (int dim : {2, 3}) {
      const int n = dim == 2 ? 32 : 12;
      auto f = random_band_limited(dim, n, 3, n / 2 - 1, seed);
      auto back = to_spectral(to_physical(f));
      CHECK(rel_l2(back, f) < 1e-13);
      CHECK(back.hermitian_defect() < 1e-14);
      GridField g = to_physical(f);
      CHECK(g.values.allFinite());
    }
  }
}

TEST_CASE("Nyquist content is discarded on construction") {
  auto f = sample(2, 16, 1, [](const double* x, double* o) { o[0] = std::cos(8 * x[0]) + std::sin(x[1]); });
  const auto& g = f.grid();
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (g.resolved()(i) == 0.0) CHECK(std::abs(f.coeffs()(i, 0)) == 0.0);
}

TEST_CASE("spectral derivative") {
  auto s = sample(2, 16, 1, [](const double* x, double* o) { o[0] = std::sin(x[0]); });
  auto c = sample(2, 16, 1, [](const double* x, double* o) { o[0] = std::cos(x[0]); });
  CHECK(abs_l2(derivative(s, 0), c) < 1e-13);
  CHECK(l2_norm(derivative(s, 1)) < 1e-15);
  auto c2 = sample(2, 16, 1, [](const double* x, double* o) { o[0] = std::cos(2 * x[0]); });
  auto ms2 = sample(2, 16, 1, [](const double* x, double* o) { o[0] = -2 * std::sin(2 * x[0]); });
  CHECK(abs_l2(derivative(c2, 0), ms2) < 1e-13);
  CHECK_THROWS_AS(derivative(s, 2), ShapeError);
}

TEST_CASE("Sobolev inner products") {
  auto f = sample(2, 16, 1, [](const double* x, double* o) { o[0] = std::sin(x[0]); });
  // 2 modes, |coeff|^2 = 1/4 each, weight (1 + 1)^2 = 4.
  CHECK(hs_inner(f, f, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(hs_norm(SpectralField(2, 16, 1), 3.7) == 0.0);
  auto g = random_band_limited(2, 16, 1, 5, 3);
  CHECK(abs_l2(g, g) == 0.0);
  CHECK_THROWS_AS(hs_inner(f, SpectralField(2, 32, 1), 0.0), ShapeError);

  // Parseval with the grid quadrature (exact for |f|^2 below the grid band).
  for (unsigned seed = 10; seed < 20; ++seed) {
    auto r = random_band_limited(2, 32, 2, 7, seed);
    GridField samples = to_physical(r);
    const double quad = samples.values.square().rowwise().sum().mean();
    CHECK(std::abs(hs_inner(r, r, 0.0) - quad) / quad < 1e-12);
  }
  auto w = f.grid().sobolev_weight(0.0);
  CHECK((w == 1.0).all());
  auto w3 = f.grid().sobolev_weight(1.5);
  CHECK((w3 > 0.0).all());
}

TEST_CASE("dealiased pointwise products") {
  auto s = sample(2, 16, 1, [](const double* x, double* o) { o[0] = std::sin(x[0]); });
  auto expect = sample(2, 16, 1, [](const double* x, double* o) { o[0] = 0.5 * (1 - std::cos(2 * x[0])); });
  CHECK(abs_l2(pointwise_product(s, s), expect) < 1e-14);

  auto one = sample(2, 16, 1, [](const double*, double* o) { o[0] = 1.0; });
  auto r = random_band_limited(2, 16, 2, 7, 4);
  CHECK(rel_l2(pointwise_product(r, one), r) < 1e-14);

  // sin x1 cos x2 = (1/4i)(e^{i(x1+x2)} + e^{i(x1-x2)} - e^{-i(x1-x2)} - e^{-i(x1+x2)})
  auto c = sample(2, 16, 1, [](const double* x, double* o) { o[0] = std::cos(x[1]); });
  auto p = pointwise_product(s, c);
  const Complex q(0.0, -0.25);
  CHECK(std::abs(p.coeff(k2(1, 1)) - q) < 1e-15);
  CHECK(std::abs(p.coeff(k2(1, -1)) - q) < 1e-15);
  CHECK(std::abs(p.coeff(k2(-1, 1)) + q) < 1e-15);
  CHECK(std::abs(p.coeff(k2(-1, -1)) + q) < 1e-15);
  CHECK(max_coeff_outside(p, {k2(1, 1), k2(1, -1), k2(-1, 1), k2(-1, -1)}) < 1e-15);
  CHECK(p.hermitian_defect() < 1e-16);

  // Agreement with direct grid multiplication when the product fits the band.
  for (unsigned seed = 30; seed < 40; ++seed) {
    auto a = random_band_limited(2, 32, 1, 7, seed);
    auto b = random_band_limited(2, 32, 1, 7, seed + 100);
    GridField ga = to_physical(a), gb = to_physical(b);
    GridField prod(2, 32, 1);
    prod.values = ga.values * gb.values;
    auto direct = to_spectral(prod);
    CHECK(rel_l2(pointwise_product(a, b), direct) < 1e-12);
  }
}

TEST_CASE("Leray projector") {
  auto g = random_band_limited(2, 32, 1, 8, 7);
  g.coeffs()(0, 0) = 0.0;
  CHECK(l2_norm(leray_project(gradient(g))) < 1e-14);

  auto shear = sample(2, 16, 2, [](const double* x, double* o) { o[0] = std::sin(x[1]); o[1] = 0.0; });
  CHECK(abs_l2(leray_project(shear), shear) < 1e-16);

  auto parallel = sample(2, 16, 2, [](const double* x, double* o) { o[0] = std::sin(x[0]); o[1] = 0.0; });
  CHECK(l2_norm(leray_project(parallel)) < 1e-16);

  CHECK_THROWS_AS(leray_project(SpectralField(2, 16, 1)), ShapeError);

  for (unsigned seed = 50; seed < 60; ++seed) {
    for (int dim : {2, 3}) {
      const int n = dim == 2 ? 32 : 12;
      auto f = random_band_limited(dim, n, dim, n / 2 - 1, seed);
      auto pf = leray_project(f);
      CHECK(abs_l2(leray_project(pf), pf) < 1e-13 * l2_norm(f));
      CHECK(hs_norm(divergence(pf), 2.0) < 1e-12 * hs_norm(f, 3.0));
      CHECK(std::abs(hs_inner(pf, f - pf, 0.0)) < 1e-12 * hs_inner(f, f, 0.0));
      // Only the mean mode survives untouched.
      CHECK(std::abs(pf.coeffs()(0, 0) - f.coeffs()(0, 0)) == 0.0);
    }
  }
}

TEST_CASE("truncation") {
  auto f = random_band_limited(2, 16, 2, 7, 11);
  CHECK(abs_l2(truncate(f, 8), f) == 0.0);
  auto s2 = sample(2, 16, 1, [](const double* x, double* o) { o[0] = std::sin(2 * x[0]); });
  CHECK(l2_norm(truncate(s2, 1)) < 1e-15);
  auto t = truncate(f, 3);
  CHECK(abs_l2(truncate(t, 3), t) == 0.0);
  CHECK(l2_norm(t) < l2_norm(f));
}

TEST_CASE("determinant of a shear map and gradient potential") {
  auto eta = sample(2, 32, 2, [](const double* x, double* o) { o[0] = -0.5 * std::sin(x[1]); o[1] = 0.0; });
  CHECK(max_det_deviation(eta) < 1e-14);
  auto bump = sample(2, 32, 2, [](const double* x, double* o) { o[0] = 0.1 * std::sin(x[0]); o[1] = 0.0; });
  CHECK(max_det_deviation(bump) == doctest::Approx(0.1).epsilon(1e-12));

  auto phi = random_band_limited(2, 32, 1, 6, 4);
  phi.coeffs()(0, 0) = 0.0;
  CHECK(rel_l2(gradient_potential(gradient(phi)), phi) < 1e-13);
}

TEST_CASE("trigonometric point evaluation") {
  auto f = random_band_limited(2, 32, 2, 9, 21);
  GridField g = to_physical(f);
  Eigen::ArrayXXd nodes(g.points(), 2);
  for (Eigen::Index p = 0; p < g.points(); ++p) {
    auto x = g.node(p);
    nodes(p, 0) = x[0];
    nodes(p, 1) = x[1];
  }
  auto at_nodes = evaluate_at(f, nodes);
  CHECK((at_nodes - g.values).abs().maxCoeff() < 1e-13 * g.values.abs().maxCoeff());

  auto s = sample(2, 32, 1, [](const double* x, double* o) { o[0] = std::sin(x[0]) * std::cos(3 * x[1]); });
  TrigEvaluator eval(s);
  CHECK(eval.bandwidth() == 3);
  double out[1];
  const double x[2] = {0.3141, -2.7};
  eval.evaluate(x, out);
  CHECK(std::abs(out[0] - std::sin(x[0]) * std::cos(3 * x[1])) < 1e-14);

  auto f3 = random_band_limited(3, 12, 1, 4, 5);
  GridField g3 = to_physical(f3);
  TrigEvaluator e3(f3);
  double v3[1];
  auto x3 = g3.node(777);
  e3.evaluate(std::span<const double>(x3.data(), 3), v3);
  CHECK(std::abs(v3[0] - g3.values(777, 0)) < 1e-13);
}

TEST_CASE("thread count does not change point evaluations") {
  auto f = random_band_limited(2, 32, 2, 9, 3);
  Eigen::ArrayXXd pts = Eigen::ArrayXXd::Random(200, 2) * 7.0;
  set_thread_count(1);
  auto a = evaluate_at(f, pts);
  set_thread_count(4);
  auto b = evaluate_at(f, pts);
  set_thread_count(0);
  CHECK((a == b).all());
}
