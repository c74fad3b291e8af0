#pragma once

#include "steuler/errors.hpp"
#include "steuler/fields.hpp"

namespace steuler {

struct EllipticConfig {
  double rel_tol = 1e-10;
  int max_iter = 500;
};

void validate(const EllipticConfig& cfg);

struct PressureSolution {
  ScalarField pi;
  VectorField grad_pi;
  int iterations = 0;
  double residual = 0.0;  // relative, discrete L2
  double rhs_mean = 0.0;  // mean of f before projection
};

/// Mean-zero pi with div(rho^-1 grad pi) = f, by conjugate gradients on
/// pi -> -div(rho^-1 grad pi) preconditioned with rho_bar * (-laplacian)^-1.
/// Throws NonPositiveDensity, IncompatibleRhs (|mean f| > 1e-8 rms f) or
/// NoConvergence.
PressureSolution solve_pressure(const ScalarField& rho, const ScalarField& f, const EllipticConfig& cfg = {});

/// -div(rho^-1 grad p), the operator the CG iteration works with.
ScalarField apply_pressure_operator(const ScalarField& rho, const ScalarField& p);

/// -z^-2 sum_ij d_j v^i d_i v^j with 2/3-rule products, mean removed.
ScalarField assemble_pressure_rhs_multiplicative(const VectorField& v_tilde, double z_inv_sq);
ScalarField assemble_pressure_rhs_additive(const VectorField& v);

struct LerayResult {
  VectorField v;
  VectorField grad_phi;
};

/// v = u - grad phi with laplacian(phi) = div u.
LerayResult leray_project(const VectorField& u);

}  // namespace steuler
