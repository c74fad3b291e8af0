#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "steuler/fields.hpp"

namespace steuler::testing {

// A fixed random trigonometric polynomial (modes |k| <= 3) usable at any resolution.
struct RandomPoly {
  struct Term {
    int k1, k2;
    double a, b;
  };
  std::vector<Term> terms;
  explicit RandomPoly(unsigned seed, int kmax = 3) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k1 = -kmax; k1 <= kmax; ++k1)
      for (int k2 = 0; k2 <= kmax; ++k2) terms.push_back({k1, k2, u(gen), u(gen)});
  }
  double operator()(const Eigen::Vector3d& x) const {
    double s = 0.0;
    for (const auto& t : terms) s += t.a * std::cos(t.k1 * x[0] + t.k2 * x[1]) + t.b * std::sin(t.k1 * x[0] + t.k2 * x[1]);
    return s;
  }
};

inline ScalarField random_scalar(const GridSpec& g, unsigned seed) {
  const RandomPoly p(seed);
  return ScalarField::from_function(g, [&](const Eigen::Vector3d& x) { return p(x); });
}

inline VectorField random_vector(const GridSpec& g, unsigned seed) {
  const RandomPoly a(seed), b(seed + 1000);
  return VectorField::from_function(g, [&](const Eigen::Vector3d& x) { return Eigen::Vector3d(a(x), b(x), 0.0); });
}

}  // namespace steuler::testing
