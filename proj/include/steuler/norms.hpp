#pragma once

#include <Eigen/Core>

#include "steuler/fields.hpp"

namespace steuler {

/// Discrete L^p norm with equal-weight periodic quadrature:
/// (cell_volume * sum |f_i|^p)^(1/p). Requires p > 1.
double lp_norm(const Eigen::ArrayXd& values, const GridSpec& grid, double p);
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& v);
/// Discrete L^2 inner product.
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);

/// Sum over multi-indices |m| <= k of ||D^m f||_{L^p}, derivatives taken
/// spectrally. k in {0, 1, 2}; p > 1. Vector fields sum their components.
double sobolev_norm(const ScalarField& f, int k, double p);
double sobolev_norm(const VectorField& v, int k, double p);

double sup_norm(const ScalarField& f);
double sup_norm(const VectorField& v);

}  // namespace steuler
