#include "steuler/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

#include "steuler/field_io.hpp"
#include "steuler/rng.hpp"

namespace steuler {

namespace {

void check_grid(double t_end, int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("time horizon must be positive");
}

Eigen::ArrayXd brownian_increments(double t_end, int n_steps, std::uint64_t seed, std::uint64_t stream) {
  Eigen::ArrayXd w(n_steps + 1);
  w[0] = 0.0;
  const double sq = std::sqrt(t_end / n_steps);
  for (int i = 0; i < n_steps; ++i) w[i + 1] = w[i] + sq * standard_normal(seed, stream, static_cast<std::uint64_t>(i));
  return w;
}

// Linear resampling of node values onto another grid whose horizon does not
// exceed the source horizon.
Eigen::ArrayXd resample_values(const Eigen::ArrayXd& v, const TimeGrid& from, const TimeGrid& to) {
  const bool same_horizon = to.t_end == from.t_end;
  if (!same_horizon && to.t_end > from.t_end) throw std::invalid_argument("resample: target horizon exceeds path horizon");
  Eigen::ArrayXd out(to.nodes());
  for (int i = 0; i < to.nodes(); ++i) {
    long long j = 0;
    double a = 0.0;
    if (same_horizon) {
      // Exact rational position i * from.n / to.n avoids rounding at shared nodes.
      const long long num = static_cast<long long>(i) * from.n_steps;
      j = num / to.n_steps;
      a = static_cast<double>(num % to.n_steps) / to.n_steps;
    } else {
      const double s = to.t(i) / from.dt();
      j = std::min<long long>(static_cast<long long>(s), from.n_steps);
      a = s - static_cast<double>(j);
    }
    out[i] = (a == 0.0 || j >= from.n_steps) ? v[j] : (1.0 - a) * v[j] + a * v[j + 1];
  }
  return out;
}

double kappa_norm2(const std::array<int, 3>& k) {
  return static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] + static_cast<double>(k[2]) * k[2];
}

std::vector<std::array<int, 3>> half_space_wavevectors(const GridSpec& grid) {
  const int c = grid.n / 3;
  std::vector<std::array<int, 3>> out;
  const int c3 = grid.dim == 3 ? c : 0;
  for (int a = -c; a <= c; ++a)
    for (int b = -c; b <= c; ++b)
      for (int d = -c3; d <= c3; ++d) {
        const std::array<int, 3> k{a, b, d};
        // first nonzero component positive
        int first = 0;
        for (int x : k)
          if (x != 0) {
            first = x;
            break;
          }
        if (first > 0) out.push_back(k);
      }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    const double nx = kappa_norm2(x), ny = kappa_norm2(y);
    if (nx != ny) return nx < ny;
    return x > y;
  });
  return out;
}

std::vector<Eigen::Vector3d> directions(const GridSpec& grid, const std::array<int, 3>& k) {
  const Eigen::Vector3d kv(k[0], k[1], k[2]);
  if (grid.dim == 2) return {Eigen::Vector3d(-kv[1], kv[0], 0.0).normalized()};
  Eigen::Index least = 0;
  kv.cwiseAbs().minCoeff(&least);
  const Eigen::Vector3d d1 = kv.cross(Eigen::Vector3d::Unit(least)).normalized();
  const Eigen::Vector3d d2 = kv.normalized().cross(d1).normalized();
  return {d1, d2};
}

}  // namespace

double BrownianPath::at(double t) const {
  const double s = std::clamp(t / time.t_end, 0.0, 1.0) * time.n_steps;
  const int j = std::min(static_cast<int>(s), time.n_steps - 1);
  const double a = s - j;
  return (1.0 - a) * w[j] + a * w[j + 1];
}

BrownianPath sample_brownian(double t_end, int n_steps, std::uint64_t seed) {
  check_grid(t_end, n_steps);
  return {TimeGrid{t_end, n_steps}, brownian_increments(t_end, n_steps, seed, 0), seed};
}

BrownianPath zero_brownian(double t_end, int n_steps) {
  check_grid(t_end, n_steps);
  return {TimeGrid{t_end, n_steps}, Eigen::ArrayXd::Zero(n_steps + 1), 0};
}

BrownianPath resample(const BrownianPath& path, const TimeGrid& time) {
  check_grid(time.t_end, time.n_steps);
  return {time, resample_values(path.w, path.time, time), path.seed};
}

BrownianPath coarsen(const BrownianPath& path, int factor) {
  if (factor < 1 || path.time.n_steps % factor != 0)
    throw std::invalid_argument("coarsen: factor must divide n_steps");
  const TimeGrid t{path.time.t_end, path.time.n_steps / factor};
  Eigen::ArrayXd w(t.nodes());
  for (int i = 0; i < t.nodes(); ++i) w[i] = path.w[i * factor];
  return {t, w, path.seed};
}

ExpFactor exp_factor(const BrownianPath& path) {
  if (path.w.size() > 0 && path.w.abs().maxCoeff() > 700.0)
    throw std::overflow_error("exp_factor: |w| exceeds 700");
  return {path.time, path.w.exp(), (-path.w).exp()};
}

int mode_budget(const GridSpec& grid) {
  validate(grid);
  const int c = grid.n / 3;
  const long long side = 2LL * c + 1;
  const long long total = grid.dim == 2 ? side * side : side * side * side;
  const long long half = (total - 1) / 2;
  return static_cast<int>(half * 2 * (grid.dim - 1));
}

std::vector<QMode> divergence_free_basis(const GridSpec& grid, int count) {
  if (count < 1) throw std::invalid_argument("mode_count must be >= 1");
  if (count > mode_budget(grid))
    throw std::invalid_argument("mode_count " + std::to_string(count) + " exceeds the dealiased mode budget " +
                                std::to_string(mode_budget(grid)));
  std::vector<QMode> out;
  for (const auto& k : half_space_wavevectors(grid)) {
    for (const auto& d : directions(grid, k))
      for (bool sine : {false, true}) {
        out.push_back({k, d, sine});
        if (static_cast<int>(out.size()) == count) return out;
      }
  }
  return out;
}

VectorField basis_field(const GridSpec& grid, const QMode& mode) {
  const double k0 = 2.0 * std::numbers::pi / grid.length;
  VectorField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto ijk = grid.unravel(i);
    // Integer phase first so every node is evaluated with exact arguments mod n.
    long long m = 0;
    for (int a = 0; a < grid.dim; ++a) m += static_cast<long long>(mode.kappa[a]) * ijk[a];
    m %= grid.n;
    if (m < 0) m += grid.n;
    const double phase = k0 * grid.spacing() * static_cast<double>(m);
    const double s = mode.sine ? std::sin(phase) : std::cos(phase);
    for (int a = 0; a < grid.dim; ++a) out.col(a)[static_cast<Eigen::Index>(i)] = mode.direction[a] * s;
  }
  return out;
}

Eigen::ArrayXd QWienerPath::surrogate_norms() const {
  Eigen::ArrayXd weight(static_cast<Eigen::Index>(modes.size()));
  const double k0 = 2.0 * std::numbers::pi / grid.length;
  for (std::size_t j = 0; j < modes.size(); ++j)
    weight[static_cast<Eigen::Index>(j)] =
        lambda[static_cast<Eigen::Index>(j)] * std::pow(1.0 + k0 * k0 * kappa_norm2(modes[j].kappa), spec.smoothness_k);
  Eigen::ArrayXd out(time.nodes());
  for (int n = 0; n < time.nodes(); ++n) out[n] = std::sqrt((weight * beta.row(n).transpose().square()).sum());
  return out;
}

QWienerPath assemble_q_wiener(const GridSpec& grid, const QWienerSpec& spec, const TimeGrid& time,
                              Eigen::ArrayXXd beta, std::uint64_t seed) {
  if (!(spec.decay_exponent > 0.0)) throw std::invalid_argument("decay_exponent must be positive");
  if (!(spec.lambda_scale > 0.0)) throw std::invalid_argument("lambda_scale must be positive");
  QWienerPath p;
  p.grid = grid;
  p.time = time;
  p.spec = spec;
  p.seed = seed;
  p.modes = divergence_free_basis(grid, spec.mode_count);
  const int M = spec.mode_count;
  if (beta.rows() != time.nodes() || beta.cols() != M)
    throw std::invalid_argument("coefficient table shape does not match time grid and mode count");
  p.lambda.resize(M);
  for (int j = 0; j < M; ++j) p.lambda[j] = spec.lambda_scale * std::pow(static_cast<double>(j + 1), -spec.decay_exponent);
  p.beta = std::move(beta);

  Eigen::MatrixXd basis(static_cast<Eigen::Index>(grid.size()) * grid.dim, M);
  for (int j = 0; j < M; ++j) {
    const VectorField e = basis_field(grid, p.modes[j]);
    basis.col(j) = Eigen::Map<const Eigen::VectorXd>(e.data().data(), e.data().size());
  }
  const Eigen::VectorXd sql = p.lambda.sqrt().matrix();
  p.frames.time = time;
  p.frames.frames.reserve(time.nodes());
  for (int n = 0; n < time.nodes(); ++n) {
    Eigen::VectorXd flat = Eigen::VectorXd::Zero(basis.rows());
    for (int j = 0; j < M; ++j) {
      const double c = sql[j] * p.beta(n, j);
      if (c != 0.0) flat += c * basis.col(j);
    }
    p.frames.frames.emplace_back(
        grid, Eigen::ArrayXXd(Eigen::Map<const Eigen::ArrayXXd>(flat.data(), static_cast<Eigen::Index>(grid.size()), grid.dim)));
  }
  return p;
}

QWienerPath sample_q_wiener(const GridSpec& grid, const QWienerSpec& spec, double t_end, int n_steps,
                            std::uint64_t seed) {
  check_grid(t_end, n_steps);
  divergence_free_basis(grid, spec.mode_count);
  Eigen::ArrayXXd beta(n_steps + 1, spec.mode_count);
  for (int j = 0; j < spec.mode_count; ++j)
    beta.col(j) = brownian_increments(t_end, n_steps, seed, static_cast<std::uint64_t>(j + 1));
  return assemble_q_wiener(grid, spec, TimeGrid{t_end, n_steps}, std::move(beta), seed);
}

QWienerPath zero_q_wiener(const GridSpec& grid, const QWienerSpec& spec, double t_end, int n_steps) {
  check_grid(t_end, n_steps);
  return assemble_q_wiener(grid, spec, TimeGrid{t_end, n_steps},
                           Eigen::ArrayXXd::Zero(n_steps + 1, spec.mode_count), 0);
}

QWienerPath resample(const QWienerPath& path, const TimeGrid& time) {
  check_grid(time.t_end, time.n_steps);
  Eigen::ArrayXXd beta(time.nodes(), path.beta.cols());
  for (Eigen::Index j = 0; j < path.beta.cols(); ++j)
    beta.col(j) = resample_values(path.beta.col(j), path.time, time);
  return assemble_q_wiener(path.grid, path.spec, time, std::move(beta), path.seed);
}

void write_path(const std::filesystem::path& stem, const BrownianPath& path) {
  auto bin = stem;
  bin += ".bin";
  write_float64(bin, path.w.data(), static_cast<std::size_t>(path.w.size()));
  auto js = stem;
  js += ".json";
  write_json(js, {{"kind", "brownian"},
                  {"components", 1},
                  {"nodes", path.time.nodes()},
                  {"t_end", path.time.t_end},
                  {"n_steps", path.time.n_steps},
                  {"seed", path.seed}});
}

void write_path(const std::filesystem::path& stem, const QWienerPath& path) {
  auto bin = stem;
  bin += ".bin";
  write_float64(bin, path.beta.data(), static_cast<std::size_t>(path.beta.size()));
  auto js = stem;
  js += ".json";
  write_json(js, {{"kind", "q_wiener"},
                  {"dim", path.grid.dim},
                  {"n_per_axis", path.grid.n},
                  {"length", path.grid.length},
                  {"components", path.spec.mode_count},
                  {"nodes", path.time.nodes()},
                  {"t_end", path.time.t_end},
                  {"n_steps", path.time.n_steps},
                  {"seed", path.seed},
                  {"decay_exponent", path.spec.decay_exponent},
                  {"smoothness_k", path.spec.smoothness_k},
                  {"lambda_scale", path.spec.lambda_scale},
                  {"layout", "beta coefficients, one block per mode"}});
}

BrownianPath read_brownian(const std::filesystem::path& stem) {
  auto js = stem;
  js += ".json";
  auto bin = stem;
  bin += ".bin";
  const auto h = read_json(js);
  if (h.at("kind") != "brownian") throw std::runtime_error(stem.string() + " is not a brownian path");
  BrownianPath p{TimeGrid{h.at("t_end").get<double>(), h.at("n_steps").get<int>()}, read_float64(bin),
                 h.at("seed").get<std::uint64_t>()};
  if (p.w.size() != p.time.nodes()) throw std::runtime_error(stem.string() + ": size does not match header");
  return p;
}

QWienerPath read_q_wiener(const std::filesystem::path& stem) {
  auto js = stem;
  js += ".json";
  auto bin = stem;
  bin += ".bin";
  const auto h = read_json(js);
  if (h.at("kind") != "q_wiener") throw std::runtime_error(stem.string() + " is not a q_wiener path");
  const GridSpec grid(h.at("dim").get<int>(), h.at("n_per_axis").get<int>(), h.at("length").get<double>());
  QWienerSpec spec;
  spec.mode_count = h.at("components").get<int>();
  spec.decay_exponent = h.at("decay_exponent").get<double>();
  spec.smoothness_k = h.at("smoothness_k").get<double>();
  spec.lambda_scale = h.at("lambda_scale").get<double>();
  const TimeGrid time{h.at("t_end").get<double>(), h.at("n_steps").get<int>()};
  const Eigen::ArrayXd flat = read_float64(bin);
  if (flat.size() != static_cast<Eigen::Index>(time.nodes()) * spec.mode_count)
    throw std::runtime_error(stem.string() + ": size does not match header");
  Eigen::ArrayXXd beta = Eigen::Map<const Eigen::ArrayXXd>(flat.data(), time.nodes(), spec.mode_count);
  return assemble_q_wiener(grid, spec, time, std::move(beta), h.at("seed").get<std::uint64_t>());
}

Eigen::ArrayXd integrate_stratonovich_reduction(const BrownianPath& path, double v0) {
  Eigen::ArrayXd v(path.time.nodes());
  v[0] = v0;
  for (int i = 0; i < path.time.n_steps; ++i) {
    const double dw = path.w[i + 1] - path.w[i];
    const double pred = v[i] - v[i] * dw;
    v[i + 1] = v[i] - 0.5 * (v[i] + pred) * dw;
  }
  return v;
}

StratonovichReport verify_stratonovich_reduction(const BrownianPath& path, double v0) {
  const Eigen::ArrayXd v = integrate_stratonovich_reduction(path, v0);
  const Eigen::ArrayXd exact = v0 * exp_factor(path).z_inv;
  return {path.time.n_steps, (v - exact).abs().maxCoeff()};
}

StratonovichReport verify_stratonovich_reduction(std::uint64_t seed, int n_steps, double v0, double t_end) {
  return verify_stratonovich_reduction(sample_brownian(t_end, n_steps, seed), v0);
}

StrongOrderStudy stratonovich_order_study(std::uint64_t first_seed, int paths, int base_steps, int levels,
                                          double v0, double t_end) {
  if (paths < 1 || levels < 2 || base_steps < 1) throw std::invalid_argument("order study needs paths >= 1, levels >= 2");
  StrongOrderStudy s;
  for (int l = 0; l < levels; ++l) s.n_steps.push_back(base_steps << l);
  s.mean_error.assign(levels, 0.0);
  const int finest = s.n_steps.back();
  for (int p = 0; p < paths; ++p) {
    const BrownianPath fine = sample_brownian(t_end, finest, first_seed + static_cast<std::uint64_t>(p));
    for (int l = 0; l < levels; ++l)
      s.mean_error[l] += verify_stratonovich_reduction(coarsen(fine, finest / s.n_steps[l]), v0).max_deviation;
  }
  for (double& e : s.mean_error) e /= paths;
  for (int l = 0; l + 1 < levels; ++l) {
    s.ratios.push_back(s.mean_error[l] / s.mean_error[l + 1]);
    s.mean_ratio += s.ratios.back();
  }
  s.mean_ratio /= static_cast<double>(s.ratios.size());
  return s;
}

}  // namespace steuler
