#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "steuler/field_io.hpp"
#include "steuler/noise.hpp"
#include "steuler/norms.hpp"
#include "steuler/rng.hpp"
#include "steuler/spectral.hpp"

using namespace steuler;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference vectors published with the Random123 library.
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("standard normals have unit variance and are stream-separated") {
  const int n = 200000;
  double s = 0.0, s2 = 0.0, cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = standard_normal(42, 0, i), b = standard_normal(42, 1, i);
    s += a;
    s2 += a * a;
    cross += a * b;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(cross / n) < 0.01);
  CHECK(uniform_open0(0, 0) > 0.0);
  CHECK(uniform_open0(0xffffffff, 0xffffffff) == 1.0);
}

TEST_CASE("brownian paths") {
  const auto a = sample_brownian(0.5, 64, 9);
  CHECK(a.w[0] == 0.0);
  const auto b = sample_brownian(0.5, 64, 9);
  CHECK((a.w == b.w).all());
  CHECK_FALSE((a.w == sample_brownian(0.5, 64, 10).w).all());
  CHECK_THROWS_AS(sample_brownian(0.5, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_brownian(0.0, 4, 1), std::invalid_argument);

  // Monte Carlo: Var w(T) = T; standard error of the variance estimate is T sqrt(2/N) ~ 1.4%.
  const double T = 0.7;
  const int seeds = 10000;
  double s2 = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    const double wT = sample_brownian(T, 8, static_cast<std::uint64_t>(seed)).w[8];
    s2 += wT * wT;
  }
  CHECK(std::abs(s2 / seeds - T) / T < 0.05);
}

TEST_CASE("resampling and coarsening keep shared nodes exactly") {
  const auto fine = sample_brownian(1.0, 64, 3);
  const auto coarse = coarsen(fine, 4);
  CHECK(coarse.time.n_steps == 16);
  for (int i = 0; i <= 16; ++i) CHECK(coarse.w[i] == fine.w[4 * i]);
  const auto up = resample(coarse, TimeGrid{1.0, 64});
  for (int i = 0; i <= 16; ++i) CHECK(up.w[4 * i] == coarse.w[i]);
  CHECK(up.w[2] == doctest::Approx(0.5 * (coarse.w[0] + coarse.w[1])));
  const auto shorter = resample(fine, TimeGrid{0.5, 32});
  for (int i = 0; i <= 32; ++i) CHECK(shorter.w[i] == doctest::Approx(fine.w[i]).epsilon(1e-12));
  CHECK_THROWS_AS(resample(fine, TimeGrid{2.0, 8}), std::invalid_argument);
  CHECK_THROWS_AS(coarsen(fine, 3), std::invalid_argument);
}

TEST_CASE("exp factor") {
  const auto zero = exp_factor(zero_brownian(1.0, 4));
  CHECK((zero.z == 1.0).all());
  CHECK((zero.z_inv == 1.0).all());
  BrownianPath p = zero_brownian(1.0, 4);
  p.w[2] = 1.0;
  CHECK(exp_factor(p).z[2] == doctest::Approx(std::numbers::e).epsilon(1e-15));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = exp_factor(sample_brownian(3.0, 256, seed));
    CHECK(f.z[0] == 1.0);
    CHECK(((f.z * f.z_inv) - 1.0).abs().maxCoeff() <= 1e-14);
  }
  p.w[3] = -701.0;
  CHECK_THROWS_AS(exp_factor(p), std::overflow_error);
}

TEST_CASE("divergence-free basis") {
  const GridSpec g2(2, 16);
  CHECK(mode_budget(g2) == 2 * ((11 * 11 - 1) / 2));
  const auto modes = divergence_free_basis(g2, 12);
  CHECK(modes[0].kappa == std::array<int, 3>{1, 0, 0});
  CHECK_FALSE(modes[0].sine);
  CHECK(modes[1].sine);
  for (std::size_t j = 1; j < modes.size(); ++j) {
    const auto& a = modes[j - 1].kappa;
    const auto& b = modes[j].kappa;
    CHECK(a[0] * a[0] + a[1] * a[1] <= b[0] * b[0] + b[1] * b[1]);
  }
  CHECK_THROWS_AS(divergence_free_basis(g2, mode_budget(g2) + 1), std::invalid_argument);
  CHECK_NOTHROW(divergence_free_basis(g2, mode_budget(g2)));

  const GridSpec g3(3, 8);
  for (const auto& m : divergence_free_basis(g3, 40)) {
    const Eigen::Vector3d k(m.kappa[0], m.kappa[1], m.kappa[2]);
    CHECK(std::abs(k.dot(m.direction)) < 1e-15);
    CHECK(m.direction.norm() == doctest::Approx(1.0));
    const VectorField e = basis_field(g3, m);
    CHECK(sup_norm(divergence(e)) <= 1e-12 * sup_norm(e));
  }
}

TEST_CASE("q-wiener paths are divergence-free and start at zero") {
  const GridSpec g(2, 16);
  const QWienerSpec spec{12, 4.0, 3.0, 1.0};
  const auto q = sample_q_wiener(g, spec, 0.2, 16, 5);
  CHECK(sup_norm(q.frames[0]) == 0.0);
  for (int n = 1; n <= 16; ++n) CHECK(sup_norm(divergence(q.frames[n])) <= 1e-12 * sup_norm(q.frames[n]));
  const auto again = sample_q_wiener(g, spec, 0.2, 16, 5);
  for (int n = 0; n <= 16; ++n) CHECK((again.frames[n].data() == q.frames[n].data()).all());
  CHECK_THROWS_AS(sample_q_wiener(g, QWienerSpec{mode_budget(g) + 1, 4.0, 3.0, 1.0}, 0.2, 4, 1), std::invalid_argument);
  // each coefficient is the scalar Brownian motion of stream j
  for (int i = 0; i <= 16; ++i) {
    double w = 0.0;
    for (int s = 0; s < i; ++s) w += std::sqrt(0.2 / 16) * standard_normal(5, 3, static_cast<std::uint64_t>(s));
    CHECK(q.beta(i, 2) == doctest::Approx(w).epsilon(1e-13));
  }
}

TEST_CASE("q-wiener Monte Carlo variance and independence") {
  const GridSpec g(2, 8);
  const QWienerSpec one{1, 4.0, 3.0, 1.0};
  const QWienerSpec two{2, 4.0, 3.0, 1.0};
  const double T = 0.3;
  const int seeds = 10000;
  double s2 = 0.0, a2 = 0.0, b2 = 0.0, ab = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto q = sample_q_wiener(g, one, T, 4, static_cast<std::uint64_t>(seed));
    // lambda_1 = 1 and e_1 = (0, cos x1): the coefficient is the frame value at the origin
    const double c = q.frames[4].col(1)[0];
    s2 += c * c;
    const auto q2 = sample_q_wiener(g, two, T, 4, static_cast<std::uint64_t>(seed));
    const double a = q2.beta(4, 0), b = q2.beta(4, 1);
    a2 += a * a;
    b2 += b * b;
    ab += a * b;
  }
  CHECK(std::abs(s2 / seeds - T) / T < 0.05);
  CHECK(std::abs(ab / std::sqrt(a2 * b2)) < 0.05);
}

TEST_CASE("trace-class surrogate is stable under doubling the mode count") {
  const GridSpec g(2, 32);
  const int seeds = 500;
  double m8 = 0.0, m16 = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    m8 += sample_q_wiener(g, QWienerSpec{8, 4.0, 3.0, 1.0}, 0.1, 4, seed).surrogate_norms()[4];
    m16 += sample_q_wiener(g, QWienerSpec{16, 4.0, 3.0, 1.0}, 0.1, 4, seed).surrogate_norms()[4];
  }
  CHECK(std::isfinite(m16));
  CHECK(std::abs(m16 / m8 - 1.0) < 0.05);
}

TEST_CASE("noise paths persist and reload bit for bit") {
  const auto dir = std::filesystem::temp_directory_path() / "steuler_test_noise";
  std::filesystem::remove_all(dir);
  const auto b = sample_brownian(0.25, 32, 77);
  write_path(dir / "w", b);
  CHECK(read_json(dir / "w.json")["kind"] == "brownian");
  const auto rb = read_brownian(dir / "w");
  CHECK((rb.w == b.w).all());
  CHECK(rb.seed == 77);

  const GridSpec g(2, 16);
  const auto q = sample_q_wiener(g, QWienerSpec{6, 3.0, 3.0, 2.0}, 0.25, 8, 78);
  write_path(dir / "q", q);
  CHECK(read_json(dir / "q.json")["kind"] == "q_wiener");
  const auto rq = read_q_wiener(dir / "q");
  CHECK((rq.beta == q.beta).all());
  for (int n = 0; n <= 8; ++n) CHECK((rq.frames[n].data() == q.frames[n].data()).all());
  CHECK_THROWS(read_q_wiener(dir / "w"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("stratonovich reduction") {
  CHECK(verify_stratonovich_reduction(zero_brownian(1.0, 64), 2.0).max_deviation == 0.0);
  const auto v = integrate_stratonovich_reduction(sample_brownian(1.0, 64, 1), 0.0);
  CHECK((v == 0.0).all());
  const auto study = stratonovich_order_study(1000, 100, 256, 3);
  REQUIRE(study.ratios.size() == 2);
  MESSAGE("mean errors " << study.mean_error[0] << " " << study.mean_error[1] << " " << study.mean_error[2]);
  CHECK(study.mean_ratio >= 1.3);
  CHECK(study.ratios[0] >= 1.3);
  CHECK(study.ratios[1] >= 1.3);
}
