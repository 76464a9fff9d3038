#include "stpca/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "stpca/error.hpp"

namespace stpca {

void LorenzConfig::validate() const {
  if (n < 3 || n % 3 != 0) throw ParameterError("Lorenz dimension n must be a positive multiple of 3");
  if (!(dt > 0.0) || dt > 0.02) throw ParameterError("Lorenz step dt must lie in (0, 0.02]");
  if (sampleEvery < 1) throw ParameterError("sampleEvery must be at least 1");
  if (transientSteps < 0) throw ParameterError("transientSteps must be non-negative");
  if (m < 2) throw ParameterError("Lorenz series needs at least two samples");
  if (!(coupling >= 0.0)) throw ParameterError("coupling must be non-negative");
}

namespace {

Eigen::VectorXd lorenz_field(const LorenzConfig& cfg, const Eigen::VectorXd& s) {
  const Eigen::Index oscillators = s.size() / 3;
  Eigen::VectorXd ds(s.size());
  for (Eigen::Index k = 0; k < oscillators; ++k) {
    const double x = s(3 * k), y = s(3 * k + 1), z = s(3 * k + 2);
    const double xNext = s(3 * ((k + 1) % oscillators));
    ds(3 * k) = cfg.sigma * (y - x) + cfg.coupling * (xNext - x);
    ds(3 * k + 1) = x * (cfg.rho - z) - y;
    ds(3 * k + 2) = x * y - cfg.beta * z;
  }
  return ds;
}

void rk4_step(const LorenzConfig& cfg, Eigen::VectorXd& s) {
  const double h = cfg.dt;
  const Eigen::VectorXd k1 = lorenz_field(cfg, s);
  const Eigen::VectorXd k2 = lorenz_field(cfg, s + 0.5 * h * k1);
  const Eigen::VectorXd k3 = lorenz_field(cfg, s + 0.5 * h * k2);
  const Eigen::VectorXd k4 = lorenz_field(cfg, s + h * k3);
  s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<int> ring_neighbours(int node, int count) {
  if (count == 2) return {1 - node};
  return {(node + count - 1) % count, (node + 1) % count};
}

}  // namespace

SeriesMatrix simulate_coupled_lorenz(const LorenzConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> planar(-10.0, 10.0);
  std::uniform_real_distribution<double> height(10.0, 40.0);
  Eigen::VectorXd state(cfg.n);
  for (int k = 0; k < cfg.n / 3; ++k) {
    state(3 * k) = planar(rng);
    state(3 * k + 1) = planar(rng);
    state(3 * k + 2) = height(rng);
  }

  for (int step = 0; step < cfg.transientSteps; ++step) rk4_step(cfg, state);
  Eigen::MatrixXd out(cfg.n, cfg.m);
  out.col(0) = state;
  for (int col = 1; col < cfg.m; ++col) {
    for (int step = 0; step < cfg.sampleEvery; ++step) rk4_step(cfg, state);
    out.col(col) = state;
  }
  if (!out.allFinite()) throw InvalidDataError("Lorenz integration diverged");

  std::vector<std::string> names;
  const char* axes[] = {"x", "y", "z"};
  for (int k = 0; k < cfg.n; ++k) names.push_back(std::string(axes[k % 3]) + std::to_string(k / 3 + 1));
  return SeriesMatrix(std::move(out), std::move(names));
}

BifNetConfig BifNetConfig::defaults(BifurcationKind kind) {
  BifNetConfig cfg;
  cfg.kind = kind;
  if (kind == BifurcationKind::kFold) {
    cfg.nodes = 18;
    cfg.tauSteps = 300;
    cfg.tauStar = 200;
  } else {
    cfg.nodes = 16;
    cfg.tauSteps = 310;
    cfg.tauStar = 210;
  }
  return cfg;
}

void BifNetConfig::validate() const {
  if (kind != BifurcationKind::kFold && kind != BifurcationKind::kHopf)
    throw ParameterError("unknown bifurcation kind");
  if (nodes < 2) throw ParameterError("network needs at least two nodes");
  if (kind == BifurcationKind::kHopf && nodes % 2 != 0)
    throw ParameterError("Hopf network needs an even number of variables");
  if (tauStar < 1 || tauStar > tauSteps) throw ParameterError("tauStar must lie in [1, tauSteps]");
  if (tauStar == 1 && tauSteps > 1) throw ParameterError("tauStar must leave room for the pre-transition ramp");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ParameterError("noise must be finite and non-negative");
  if (!(dt > 0.0) || substeps < 1) throw ParameterError("integration step must be positive");
  if (!(coupling >= 0.0)) throw ParameterError("coupling must be non-negative");
}

double bifurcation_parameter(const BifNetConfig& cfg, int tau) {
  constexpr double kStart = -1.0;
  constexpr double kEnd = 0.3;
  if (tau <= cfg.tauStar) {
    if (cfg.tauStar == 1) return 0.0;
    return kStart * static_cast<double>(cfg.tauStar - tau) / (cfg.tauStar - 1);
  }
  if (cfg.tauSteps == cfg.tauStar) return 0.0;
  return kEnd * static_cast<double>(tau - cfg.tauStar) / (cfg.tauSteps - cfg.tauStar);
}

Eigen::VectorXd bifurcation_drift(const BifNetConfig& cfg, double p, const Eigen::Ref<const Eigen::VectorXd>& s) {
  Eigen::VectorXd ds(s.size());
  if (cfg.kind == BifurcationKind::kFold) {
    const int count = static_cast<int>(s.size());
    for (int i = 0; i < count; ++i) {
      double diffusion = 0.0;
      for (int j : ring_neighbours(i, count)) diffusion += s(j) - s(i);
      ds(i) = -(s(i) * s(i) + p) + cfg.coupling * diffusion;
    }
    return ds;
  }
  const int pairs = static_cast<int>(s.size() / 2);
  for (int k = 0; k < pairs; ++k) {
    const double x = s(2 * k), y = s(2 * k + 1);
    const double r2 = x * x + y * y;
    double dx = 0.0, dy = 0.0;
    if (pairs > 1) {
      for (int j : ring_neighbours(k, pairs)) {
        dx += s(2 * j) - x;
        dy += s(2 * j + 1) - y;
      }
    }
    ds(2 * k) = p * x - cfg.omega * y - x * r2 + cfg.coupling * dx;
    ds(2 * k + 1) = cfg.omega * x + p * y - y * r2 + cfg.coupling * dy;
  }
  return ds;
}

Eigen::VectorXd bifurcation_equilibrium(const BifNetConfig& cfg, double p) {
  if (cfg.kind == BifurcationKind::kFold)
    return Eigen::VectorXd::Constant(cfg.nodes, p < 0.0 ? std::sqrt(-p) : 0.0);
  return Eigen::VectorXd::Zero(cfg.nodes);
}

BifurcationSeries simulate_bifurcation_network(const BifNetConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double kick = cfg.noise * std::sqrt(cfg.dt);

  Eigen::VectorXd state = bifurcation_equilibrium(cfg, bifurcation_parameter(cfg, 1));
  Eigen::MatrixXd out(cfg.nodes, cfg.tauSteps);
  for (int tau = 1; tau <= cfg.tauSteps; ++tau) {
    const double p = bifurcation_parameter(cfg, tau);
    for (int step = 0; step < cfg.substeps; ++step) {
      state += cfg.dt * bifurcation_drift(cfg, p, state);
      for (Eigen::Index i = 0; i < state.size(); ++i) state(i) += kick * normal(rng);
      if (cfg.kind == BifurcationKind::kFold) state = state.cwiseMax(cfg.collapseFloor);
    }
    out.col(tau - 1) = state;
  }
  std::vector<double> taus(static_cast<std::size_t>(cfg.tauSteps));
  for (int tau = 1; tau <= cfg.tauSteps; ++tau) taus[static_cast<std::size_t>(tau - 1)] = tau;
  return {SeriesMatrix(std::move(out), {}, std::move(taus)), cfg.tauStar};
}

SeriesMatrix add_observation_noise(const SeriesMatrix& X, const NoiseSpec& spec) {
  if (!std::isfinite(spec.intensity) || spec.intensity < 0.0)
    throw ParameterError("noise intensity must be finite and non-negative");
  if (spec.intensity == 0.0) return X;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.intensity);
  Eigen::MatrixXd out = X.values();
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) += normal(rng);
  return X.withValues(std::move(out));
}

}  // namespace stpca
