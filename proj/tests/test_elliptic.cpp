#include <doctest.h>

#include <cmath>

#include "steuler/elliptic.hpp"
#include "steuler/norms.hpp"
#include "steuler/spectral.hpp"
#include "support.hpp"

using namespace steuler;
using steuler::testing::random_scalar;
using steuler::testing::random_vector;

namespace {

VectorField taylor_green(const GridSpec& g) {
  return VectorField::from_function(g, [](const Eigen::Vector3d& x) {
    return Eigen::Vector3d(std::sin(x[0]) * std::cos(x[1]), -std::cos(x[0]) * std::sin(x[1]), 0.0);
  });
}

ScalarField positive_density(const GridSpec& g, unsigned seed) {
  const ScalarField r = random_scalar(g, seed);
  const double s = sup_norm(r);
  return ScalarField(g, 1.5 + 0.4 * r.values() / s);
}

}  // namespace

TEST_CASE("elliptic config validation") {
  CHECK_NOTHROW(validate(EllipticConfig{}));
  CHECK_THROWS_AS(validate(EllipticConfig{0.0, 10}), std::invalid_argument);
  CHECK_THROWS_AS(validate(EllipticConfig{1.0, 10}), std::invalid_argument);
  CHECK_THROWS_AS(validate(EllipticConfig{1e-8, 0}), std::invalid_argument);
}

TEST_CASE("zero right-hand side gives zero pressure") {
  const GridSpec g(2, 32);
  const auto s = solve_pressure(positive_density(g, 1), ScalarField(g));
  CHECK(sup_norm(s.pi) == 0.0);
  CHECK(sup_norm(s.grad_pi) == 0.0);
}

TEST_CASE("unit density manufactured solution") {
  const GridSpec g(2, 64);
  const ScalarField f = ScalarField::from_function(g, [](const Eigen::Vector3d& x) { return -std::cos(x[0]); });
  const auto s = solve_pressure(ScalarField::constant(g, 1.0), f);
  const ScalarField pi_star = ScalarField::from_function(g, [](const Eigen::Vector3d& x) { return std::cos(x[0]); });
  const VectorField grad_star =
      VectorField::from_function(g, [](const Eigen::Vector3d& x) { return Eigen::Vector3d(-std::sin(x[0]), 0, 0); });
  CHECK(l2_norm(s.pi - pi_star) <= 1e-9);
  CHECK(l2_norm(s.grad_pi - grad_star) <= 1e-9);
  CHECK(s.iterations <= 100);
}

TEST_CASE("variable density manufactured solution") {
  const GridSpec g(2, 64);
  const ScalarField rho = ScalarField::from_function(g, [](const Eigen::Vector3d& x) { return 2.0 + std::cos(x[0]); });
  // div(rho^-1 grad sin x2) = -sin x2 / (2 + cos x1)
  const ScalarField f =
      ScalarField::from_function(g, [](const Eigen::Vector3d& x) { return -std::sin(x[1]) / (2.0 + std::cos(x[0])); });
  const EllipticConfig cfg;
  const auto s = solve_pressure(rho, f, cfg);
  const ScalarField pi_star = ScalarField::from_function(g, [](const Eigen::Vector3d& x) { return std::sin(x[1]); });
  CHECK(l2_norm(s.pi - pi_star) / l2_norm(pi_star) <= 10.0 * cfg.rel_tol);
  CHECK(s.residual <= cfg.rel_tol);
  CHECK(s.iterations <= 100);
}

TEST_CASE("taylor-green pressure right-hand side") {
  const GridSpec g(2, 32);
  const ScalarField rhs = assemble_pressure_rhs_multiplicative(taylor_green(g), 1.0);
  // term-by-term expansion of -sum_ij d_j v^i d_i v^j
  const ScalarField oracle = ScalarField::from_function(g, [](const Eigen::Vector3d& x) {
    const double a = std::cos(x[0]) * std::cos(x[1]);  // d1 v1
    const double b = -std::sin(x[0]) * std::sin(x[1]); // d2 v1
    const double c = std::sin(x[0]) * std::sin(x[1]);  // d1 v2
    const double d = -std::cos(x[0]) * std::cos(x[1]); // d2 v2
    return -(a * a + b * c + c * b + d * d);
  });
  CHECK(sup_norm(rhs - oracle) <= 1e-13);
  CHECK(sup_norm(assemble_pressure_rhs_multiplicative(VectorField(g), 0.3)) == 0.0);
  CHECK(sup_norm(assemble_pressure_rhs_additive(VectorField(g))) == 0.0);
}

TEST_CASE("pressure right-hand side scaling and regime equivalence") {
  const GridSpec g(2, 32);
  const VectorField v = leray_project(random_vector(g, 4)).v;
  const ScalarField base = assemble_pressure_rhs_multiplicative(v, 1.0);
  const ScalarField scaled = assemble_pressure_rhs_multiplicative(2.5 * v, 1.0);
  CHECK(sup_norm(scaled - 6.25 * base) <= 1e-12 * sup_norm(scaled));
  const ScalarField z = assemble_pressure_rhs_multiplicative(v, 0.25);
  CHECK(sup_norm(z - 0.25 * base) <= 1e-13 * sup_norm(base));
  CHECK((assemble_pressure_rhs_additive(v).values() == base.values()).all());
  CHECK(std::abs(mean(base)) <= 1e-14 * sup_norm(base));
}

TEST_CASE("leray projection") {
  const GridSpec g(2, 32);
  const VectorField tg = taylor_green(g);
  const auto fixed = leray_project(tg);
  CHECK(sup_norm(fixed.v - tg) <= 1e-12);
  CHECK(sup_norm(fixed.grad_phi) <= 1e-12);

  const VectorField grad = VectorField::from_function(g, [](const Eigen::Vector3d& x) {
    const double c = std::cos(x[0] + x[1]);
    return Eigen::Vector3d(c, c, 0.0);
  });
  CHECK(sup_norm(leray_project(grad).v) <= 1e-12);

  for (unsigned seed = 10; seed < 13; ++seed) {
    const VectorField u = random_vector(g, seed);
    const auto r = leray_project(u);
    CHECK(sup_norm(divergence(r.v)) <= 1e-12 * (1.0 + sup_norm(u)));
    CHECK(sup_norm(r.v + r.grad_phi - u) <= 1e-14 * sup_norm(u) * 10);
    CHECK(sup_norm(leray_project(r.v).v - r.v) <= 1e-12);
    CHECK(std::abs(inner(r.v, r.grad_phi)) <= 1e-10 * inner(u, u));
  }
}

TEST_CASE("pressure operator is symmetric") {
  const GridSpec g(2, 32);
  const ScalarField rho = positive_density(g, 20);
  const ScalarField a = random_scalar(g, 21), b = random_scalar(g, 22);
  const double ab = inner(apply_pressure_operator(rho, a), b);
  const double ba = inner(a, apply_pressure_operator(rho, b));
  CHECK(std::abs(ab - ba) <= 1e-12 * std::abs(ab));
  CHECK(inner(apply_pressure_operator(rho, a), a) > 0.0);
}

TEST_CASE("constant density reduces to a scaled poisson solve") {
  const GridSpec g(2, 32);
  ScalarField f = random_scalar(g, 30);
  f = ScalarField(g, f.values() - mean(f));
  const double c = 1.7;
  const EllipticConfig cfg;
  const auto s = solve_pressure(ScalarField::constant(g, c), f, cfg);
  const ScalarField oracle = c * solve_poisson(f);
  CHECK(l2_norm(s.pi - oracle) <= cfg.rel_tol * l2_norm(oracle));
}

TEST_CASE("elliptic error conditions") {
  const GridSpec g(2, 32);
  ScalarField f = random_scalar(g, 40);
  f = ScalarField(g, f.values() - mean(f));
  ScalarField rho = ScalarField::constant(g, 1.0);
  rho.values()[5] = 0.0;
  CHECK_THROWS_AS(solve_pressure(rho, f), NonPositiveDensity);
  CHECK_THROWS_AS(solve_pressure(ScalarField::constant(g, 1.0), ScalarField::constant(g, 1.0)), IncompatibleRhs);
  try {
    solve_pressure(positive_density(g, 41), f, EllipticConfig{1e-12, 1});
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.residual > 1e-12);
  }
}
