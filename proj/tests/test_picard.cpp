#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "steuler/elliptic.hpp"
#include "steuler/norms.hpp"
#include "steuler/picard.hpp"
#include "steuler/spectral.hpp"

using namespace steuler;

namespace {

VectorField taylor_green(const GridSpec& g, double amp = 1.0) {
  return VectorField::from_function(g, [amp](const Eigen::Vector3d& x) {
    return Eigen::Vector3d(amp * std::sin(x[0]) * std::cos(x[1]), -amp * std::cos(x[0]) * std::sin(x[1]), 0.0);
  });
}

ProblemSetup tg_setup(int n = 32, int n_steps = 16, double T = 0.1) {
  const GridSpec g(2, n);
  ProblemSetup s;
  s.rho0 = ScalarField::constant(g, 1.0);
  s.v0 = taylor_green(g);
  s.t_horizon = T;
  s.n_steps = n_steps;
  s.cfg.use_stopping_time = false;
  return s;
}

ProblemSetup blob_setup(int n = 32, int n_steps = 16) {
  ProblemSetup s = tg_setup(n, n_steps);
  s.rho0 = ScalarField::from_function(s.rho0.grid(), [](const Eigen::Vector3d& x) {
    return 1.5 + 0.5 * std::sin(x[0]) * std::sin(x[1]);
  });
  return s;
}

// First fine node where the trace reaches the threshold, on a grid refine
// times finer; the values between coarse nodes are linear interpolants.
double refined_crossing(const Eigen::ArrayXd& integrand_coarse, const TimeGrid& t, int refine,
                        const std::function<double(double, double, double)>& functional, double threshold) {
  const int nf = t.n_steps * refine;
  const double dtf = t.t_end / nf;
  double integral = 0.0, prev = 0.0;
  auto value = [&](int i) {
    const int j = std::min(i / refine, t.n_steps - 1);
    const double a = static_cast<double>(i - j * refine) / refine;
    return (1.0 - a) * integrand_coarse[j] + a * integrand_coarse[j + 1];
  };
  for (int i = 0; i <= nf; ++i) {
    if (i > 0) integral += 0.5 * dtf * (prev + value(i));
    prev = value(i);
    if (functional(i * dtf, integral, prev) >= threshold) return i * dtf;
  }
  return t.t_end;
}

}  // namespace

TEST_CASE("regime names") {
  for (auto r : {Regime::multiplicative, Regime::additive, Regime::deterministic})
    CHECK(parse_regime(to_string(r)) == r);
  CHECK_THROWS_AS(parse_regime("ito"), std::invalid_argument);
}

TEST_CASE("multiplicative stopping time") {
  const auto zero = exp_factor(zero_brownian(1.0, 64));
  const auto r = stopping_time_multiplicative(zero, 2.0, 1.0);
  CHECK(r.tau == 0.25);
  CHECK_FALSE(r.capped);
  const auto capped = stopping_time_multiplicative(exp_factor(zero_brownian(0.1, 64)), 2.0, 0.1);
  CHECK(capped.tau == 0.1);
  CHECK(capped.capped);
  CHECK_THROWS_AS(stopping_time_multiplicative(zero, 1.0, 1.0), std::invalid_argument);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto path = sample_brownian(1.0, 64, seed);
    const auto f = exp_factor(path);
    double last = 1e300;
    for (double A : {1.5, 2.0, 3.0, 5.0}) {
      const auto st = stopping_time_multiplicative(f, A, 1.0);
      CHECK(st.tau <= last);
      last = st.tau;
      const double oracle = refined_crossing(f.z_inv, f.time, 10, [](double, double I, double) { return I; },
                                             1.0 / (A * A));
      CHECK(std::abs(st.tau - oracle) <= f.time.dt());
    }
  }
}

TEST_CASE("additive stopping time") {
  const TimeGrid t{1.0, 120};
  const Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(t.nodes());
  const auto r = stopping_time_additive(zero, t, 2.0, 1.0);
  CHECK(r.tau == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(stopping_time_additive(zero, t, 2.0, 0.05).tau == 0.05);
  CHECK(stopping_time_additive(zero, t, 2.0, 0.05).capped);
  double last = 1e300;
  for (double A : {1.5, 2.0, 4.0}) {
    const double tau = stopping_time_additive(zero, t, A, 1.0).tau;
    CHECK(tau <= last);
    last = tau;
  }

  const GridSpec g(2, 16);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto q = sample_q_wiener(g, QWienerSpec{}, 1.0, 50, seed);
    const Eigen::ArrayXd norms = q.surrogate_norms();
    const double A = 1.5;
    const auto st = stopping_time_additive(norms, q.time, A, 1.0);
    const double oracle = refined_crossing(
        norms, q.time, 10,
        [A](double s, double I, double qn) { return A * A * s + std::numbers::e * I + qn / A; }, 1.0 / 3.0);
    CHECK(std::abs(st.tau - oracle) <= q.time.dt());
  }
}

TEST_CASE("zero initial velocity is a fixed point") {
  ProblemSetup s = blob_setup(16, 8);
  s.v0 = VectorField(s.rho0.grid());
  const auto path = sample_brownian(0.1, 8, 3);
  const auto r = run_multiplicative(s, path);
  CHECK(r.report.converged);
  CHECK(r.report.iterations == 1);
  for (int n = 0; n < r.state.v.nodes(); ++n) {
    CHECK(sup_norm(r.state.v[n]) == 0.0);
    CHECK(sup_norm(r.state.grad_pi[n]) == 0.0);
    CHECK((r.state.rho[n].values() == s.rho0.values()).all());
  }
  const auto bounds = verify_bounds(r);
  CHECK(bounds.pass);
  CHECK(bounds.sup_v2p == 0.0);
  const auto res = check_spde_residual(r);
  CHECK(res.velocity_sup == 0.0);
  CHECK(res.density_sup == 0.0);
  CHECK(monitor_convergence({0.0, 0.0, 0.0}).monotone_tail);

  const auto ra = run_additive(s, zero_q_wiener(s.rho0.grid(), QWienerSpec{}, 0.1, 8));
  CHECK(ra.report.converged);
  for (int n = 0; n < ra.state.v.nodes(); ++n) CHECK(sup_norm(ra.state.v[n]) == 0.0);
}

TEST_CASE("first additive iterate from rest equals the noise") {
  const GridSpec g(2, 16);
  ProblemSetup s;
  s.rho0 = ScalarField::constant(g, 1.0);
  s.v0 = VectorField(g);
  s.t_horizon = 0.1;
  s.n_steps = 8;
  const TimeGrid t{0.1, 8};
  const auto q = sample_q_wiener(g, QWienerSpec{1, 4.0, 3.0, 1.0}, 0.1, 8, 11);
  const auto ctx = make_noise_context(Regime::additive, t, nullptr, &q);
  const auto first = picard_sweep(s, ctx, VectorSeries(t, VectorField(g)));
  for (int n = 0; n < t.nodes(); ++n) {
    CHECK(sup_norm(first.u[n]) == 0.0);
    CHECK((first.v[n].data() == q.frames[n].data()).all());
  }

  // doubling every lambda scales the first iterate by sqrt 2
  const QWienerSpec base{6, 4.0, 3.0, 1.0}, twice{6, 4.0, 3.0, 2.0};
  const auto q1 = sample_q_wiener(g, base, 0.1, 8, 12);
  const auto q2 = sample_q_wiener(g, twice, 0.1, 8, 12);
  const auto v1 = picard_sweep(s, make_noise_context(Regime::additive, t, nullptr, &q1), VectorSeries(t, VectorField(g)));
  const auto v2 = picard_sweep(s, make_noise_context(Regime::additive, t, nullptr, &q2), VectorSeries(t, VectorField(g)));
  for (int n = 1; n < t.nodes(); ++n)
    CHECK(sup_norm(v2.v[n] - std::sqrt(2.0) * v1.v[n]) <= 1e-15 * sup_norm(v2.v[n]) * 4);
}

TEST_CASE("deterministic taylor-green run") {
  const auto s = tg_setup();
  const auto r = run_deterministic(s);
  REQUIRE(r.report.converged);
  CHECK(r.report.iterations <= 10);
  CHECK(r.report.final_diff < s.cfg.picard_tol);
  for (int n = 0; n < r.state.v.nodes(); ++n) CHECK(l2_norm(r.state.v[n] - s.v0) <= 1e-6);
  std::vector<double> d;
  for (const auto& h : r.report.history) d.push_back(h.d);
  const auto mon = monitor_convergence(d);
  CHECK(mon.monotone_tail);
  CHECK(mon.max_ratio_from_2 <= 0.5);
  const auto b = verify_bounds(r);
  CHECK(b.max_principle.pass);
  CHECK(b.div_pass);
  CHECK(b.gradient_bound.pass);

  // one more sweep changes sup_t |v|_{1,p} by at most the tolerance
  const auto again = picard_sweep(r.setup, r.noise, r.state.v);
  double a = 0.0, c = 0.0;
  for (int n = 0; n < again.v.nodes(); ++n) {
    a = std::max(a, sobolev_norm(r.state.v[n], 1, 4.0));
    c = std::max(c, sobolev_norm(again.v[n], 1, 4.0));
  }
  CHECK(std::abs(a - c) <= s.cfg.picard_tol);
}

TEST_CASE("zero-noise regimes agree") {
  const auto s = blob_setup(16, 8);
  const auto m = run_multiplicative(s, zero_brownian(0.1, 8));
  const auto a = run_additive(s, zero_q_wiener(s.rho0.grid(), QWienerSpec{}, 0.1, 8));
  const auto d = run_deterministic(s);
  REQUIRE(m.report.converged);
  REQUIRE(a.report.converged);
  for (int n = 0; n < m.state.v.nodes(); ++n) {
    CHECK(l2_norm(m.state.v[n] - a.state.v[n]) <= 1e-8);
    CHECK(l2_norm(m.state.v[n] - d.state.v[n]) <= 1e-8);
    CHECK(l2_norm(m.state.rho[n] - a.state.rho[n]) <= 1e-8);
  }
}

TEST_CASE("multiplicative run with noise") {
  const auto s = blob_setup(16, 16);
  const auto path = sample_brownian(0.1, 16, 5);
  const auto r = run_multiplicative(s, path);
  REQUIRE(r.report.converged);
  const auto v = physical_velocity(r);
  for (int n = 0; n < v.nodes(); ++n)
    CHECK(sup_norm(v[n] - r.noise.z_inv[n] * r.state.v[n]) <= 1e-15 * (1.0 + sup_norm(v[n])));
  const auto b = verify_bounds(r);
  CHECK(b.max_principle.pass);
  CHECK(b.div_pass);
  const auto u = uniqueness_harness(s, Regime::multiplicative, &path, nullptr);
  CHECK(u.both_converged);
  CHECK(u.pass);
  CHECK(u.difference <= 10.0 * s.cfg.picard_tol);
}

TEST_CASE("uniqueness harness") {
  const auto u = uniqueness_harness(tg_setup(16, 8), Regime::deterministic, nullptr, nullptr);
  CHECK(u.pass);
  ProblemSetup rest = tg_setup(16, 8);
  rest.v0 = VectorField(rest.rho0.grid());
  const auto z = uniqueness_harness(rest, Regime::deterministic, nullptr, nullptr);
  CHECK(z.pass);
  CHECK(z.difference == 0.0);
}

TEST_CASE("pressure gauge does not reach the velocity") {
  const GridSpec g(2, 32);
  const TimeGrid t{0.1, 4};
  const ScalarField rho = ScalarField::from_function(g, [](const Eigen::Vector3d& x) { return 2.0 + std::cos(x[0]); });
  const auto p = solve_pressure(rho, assemble_pressure_rhs_additive(taylor_green(g)));
  const ScalarField shifted(g, p.pi.values() + 3.0);
  auto forcing = [&](const ScalarField& pi) {
    const VectorField gp = gradient(pi);
    VectorField f(g);
    for (int a = 0; a < 2; ++a) f.col(a) = -gp.col(a) / rho.values();
    return VectorSeries(t, f);
  };
  const VectorSeries adv(t, taylor_green(g));
  const auto u0 = solve_forced_velocity(taylor_green(g), adv, forcing(p.pi));
  const auto u1 = solve_forced_velocity(taylor_green(g), adv, forcing(shifted));
  for (int n = 0; n < t.nodes(); ++n) CHECK(sup_norm(u0[n] - u1[n]) <= 1e-14);
}

TEST_CASE("convergence monitor") {
  const auto good = monitor_convergence({1.0, 0.1, 0.01, 0.001});
  CHECK(good.monotone_tail);
  CHECK(good.k0 == 1);
  CHECK(good.max_ratio_from_2 == doctest::Approx(0.1));
  CHECK(good.partial_sums.back() == doctest::Approx(1.111));
  const auto stalled = monitor_convergence({1.0, 0.5, 0.5, 0.5});
  CHECK_FALSE(stalled.monotone_tail);
  CHECK_FALSE(stalled.diagnostic.empty());
  const auto late = monitor_convergence({1.0, 2.0, 1.0, 0.1});
  CHECK(late.monotone_tail);
  CHECK(late.k0 == 2);
}

TEST_CASE("non-convergence and sub-solver failures") {
  ProblemSetup s = tg_setup(16, 8);
  s.cfg.k_max = 1;
  const auto r = run_deterministic(s);
  CHECK_FALSE(r.report.converged);
  CHECK(r.report.history.size() == 1);
  CHECK_THROWS_AS(require_converged(r), NoConvergence);

  ProblemSetup bad = tg_setup(16, 8);
  bad.rho0.values()[0] = -1.0;
  try {
    run_deterministic(bad);
    FAIL("expected NonPositiveDensity");
  } catch (const NonPositiveDensity& e) {
    CHECK(std::string(e.what()).find("initial density") != std::string::npos);
  }
}

TEST_CASE("divergent initial velocity is projected") {
  ProblemSetup s = tg_setup(16, 8);
  s.v0 = s.v0 + VectorField::from_function(s.v0.grid(), [](const Eigen::Vector3d& x) {
           return Eigen::Vector3d(0.1 * std::sin(x[0]), 0.0, 0.0);
         });
  const auto r = run_deterministic(s);
  CHECK(r.report.v0_projected);
  CHECK(r.report.converged);
  CHECK(sup_norm(r.state.v[0] - taylor_green(s.v0.grid())) <= 1e-12);
}
