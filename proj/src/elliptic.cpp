#include "steuler/elliptic.hpp"

#include <cmath>
#include <sstream>

#include "steuler/spectral.hpp"

namespace steuler {

namespace {

double dot(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) { return (a * b).sum(); }

Eigen::ArrayXd apply_operator(const Spectral& sp, const Eigen::ArrayXd& inv_rho, const Eigen::ArrayXd& p) {
  const GridSpec& g = sp.grid();
  const Eigen::ArrayXcd ph = sp.forward(p);
  const std::complex<double> I(0.0, 1.0);
  Eigen::ArrayXcd acc = Eigen::ArrayXcd::Zero(sp.spectral_size());
  for (int a = 0; a < g.dim; ++a) {
    const Eigen::ArrayXcd ik = I * sp.derivative_wavenumber(a).cast<std::complex<double>>();
    const Eigen::ArrayXd flux = inv_rho * sp.inverse(ph * ik);
    acc += sp.forward(flux) * ik;
  }
  return -sp.inverse(acc);
}

Eigen::ArrayXd precondition(const Spectral& sp, double rho_bar, const Eigen::ArrayXd& r) {
  Eigen::ArrayXcd h = sp.forward(r);
  const auto& k2 = sp.k_squared();
  for (Eigen::Index s = 0; s < h.size(); ++s) h[s] = k2[s] > 0.0 ? h[s] * (rho_bar / k2[s]) : 0.0;
  return sp.inverse(h);
}

Eigen::ArrayXd project_range(const Spectral& sp, const Eigen::ArrayXd& f) {
  Eigen::ArrayXcd h = sp.forward(f);
  const auto& k2 = sp.k_squared();
  for (Eigen::Index s = 0; s < h.size(); ++s)
    if (!(k2[s] > 0.0)) h[s] = 0.0;
  return sp.inverse(h);
}

}  // namespace

void validate(const EllipticConfig& cfg) {
  if (!(cfg.rel_tol > 0.0 && cfg.rel_tol < 1.0)) throw std::invalid_argument("elliptic rel_tol must be in (0, 1)");
  if (cfg.max_iter < 1) throw std::invalid_argument("elliptic max_iter must be >= 1");
}

ScalarField apply_pressure_operator(const ScalarField& rho, const ScalarField& p) {
  const auto& sp = Spectral::for_grid(rho.grid());
  return ScalarField(rho.grid(), apply_operator(sp, rho.values().inverse(), p.values()));
}

PressureSolution solve_pressure(const ScalarField& rho, const ScalarField& f, const EllipticConfig& cfg) {
  validate(cfg);
  if (!(rho.grid() == f.grid())) throw std::invalid_argument("solve_pressure: grids differ");
  const GridSpec& g = rho.grid();
  const double rho_min = rho.values().minCoeff();
  if (!(rho_min > 0.0)) {
    std::ostringstream os;
    os << "density minimum " << rho_min << " is not positive";
    throw NonPositiveDensity(os.str());
  }
  if (!f.all_finite()) throw std::invalid_argument("solve_pressure: right-hand side is not finite");

  PressureSolution out;
  out.rhs_mean = mean(f);
  const double rms = std::sqrt(f.values().square().mean());
  if (std::abs(out.rhs_mean) > 1e-8 * rms) {
    std::ostringstream os;
    os << "pressure right-hand side has mean " << out.rhs_mean << " (rms " << rms << ")";
    throw IncompatibleRhs(os.str());
  }
  out.pi = ScalarField(g);
  out.grad_pi = VectorField(g);
  if (rms == 0.0) return out;

  const auto& sp = Spectral::for_grid(g);
  const Eigen::ArrayXd inv_rho = rho.values().inverse();
  const double rho_bar = rho.values().mean();
  // A pi = b with A = -div(rho^-1 grad .) and b = -f restricted to the range of A.
  const Eigen::ArrayXd b = -project_range(sp, f.values());
  const double b_norm = std::sqrt(dot(b, b));

  Eigen::ArrayXd x = Eigen::ArrayXd::Zero(b.size());
  Eigen::ArrayXd r = b;
  Eigen::ArrayXd z = precondition(sp, rho_bar, r);
  Eigen::ArrayXd p = z;
  double rz = dot(r, z);
  double rel = 1.0;
  int it = 0;
  while (it < cfg.max_iter) {
    ++it;
    const Eigen::ArrayXd Ap = apply_operator(sp, inv_rho, p);
    const double alpha = rz / dot(p, Ap);
    x += alpha * p;
    r -= alpha * Ap;
    rel = std::sqrt(dot(r, r)) / b_norm;
    if (rel <= cfg.rel_tol) break;
    z = precondition(sp, rho_bar, r);
    const double rz_new = dot(r, z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  out.iterations = it;
  out.residual = rel;
  if (!(rel <= cfg.rel_tol)) {
    std::ostringstream os;
    os << "pressure CG did not converge in " << cfg.max_iter << " iterations (relative residual " << rel << ")";
    throw NoConvergence(os.str(), rel);
  }
  out.pi = ScalarField(g, x);
  out.grad_pi = gradient(out.pi);
  return out;
}

ScalarField assemble_pressure_rhs_multiplicative(const VectorField& v_tilde, double z_inv_sq) {
  const GridSpec& g = v_tilde.grid();
  const int d = g.dim;
  const Eigen::ArrayXXd J = velocity_gradient(dealias(v_tilde));
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(J.rows());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) acc += J.col(i * d + j) * J.col(j * d + i);
  ScalarField rhs = dealias(ScalarField(g, acc));
  rhs.values() *= -z_inv_sq;
  rhs.values() -= mean(rhs);
  return rhs;
}

ScalarField assemble_pressure_rhs_additive(const VectorField& v) { return assemble_pressure_rhs_multiplicative(v, 1.0); }

LerayResult leray_project(const VectorField& u) {
  const ScalarField phi = solve_poisson(divergence(u));
  LerayResult out{VectorField(u.grid()), gradient(phi)};
  out.v.data() = u.data() - out.grad_phi.data();
  return out;
}

}  // namespace steuler
