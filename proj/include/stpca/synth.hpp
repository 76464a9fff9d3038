#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "stpca/series.hpp"

namespace stpca {

/// n/3 Lorenz oscillators, ring-coupled through x: each x-equation gains
/// coupling * (x_next - x_this). Rows are ordered x1, y1, z1, x2, ...
struct LorenzConfig {
  int n = 3;
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  double coupling = 1.0;
  double dt = 0.01;
  int sampleEvery = 10;
  int transientSteps = 1000;
  int m = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Fixed-step RK4; initial conditions drawn from the seed.
SeriesMatrix simulate_coupled_lorenz(const LorenzConfig& cfg);

enum class BifurcationKind { kFold, kHopf };

struct BifNetConfig {
  BifurcationKind kind = BifurcationKind::kFold;
  int nodes = 18;
  int tauSteps = 300;
  /// 1-based tau at which the control parameter crosses zero.
  int tauStar = 200;
  double coupling = 0.1;
  double noise = 0.02;
  std::uint64_t seed = 0;
  double dt = 0.01;
  int substeps = 100;
  double omega = 1.0;
  /// Fold nodes that run away past the fold are held at this floor.
  double collapseFloor = -5.0;

  static BifNetConfig defaults(BifurcationKind kind);

  void validate() const;
};

struct BifurcationSeries {
  SeriesMatrix data;
  int tauStar;
};

/// Control parameter at 1-based tau: piecewise linear, -1 at tau = 1,
/// 0 at tauStar, +0.3 at tauSteps.
double bifurcation_parameter(const BifNetConfig& cfg, int tau);

/// Deterministic vector field of the network at control value p.
Eigen::VectorXd bifurcation_drift(const BifNetConfig& cfg, double p, const Eigen::Ref<const Eigen::VectorXd>& state);

/// Stable equilibrium for p < 0: sqrt(-p) on every fold node, origin for Hopf.
Eigen::VectorXd bifurcation_equilibrium(const BifNetConfig& cfg, double p);

/// Euler-Maruyama with `substeps` steps of dt per tau, one sample per tau.
/// Fold nodes: dx_i = -(x_i^2 + p) + c sum_j A_ij (x_j - x_i) on a ring.
/// Hopf pairs: normal form with frequency omega, diffusive ring coupling.
BifurcationSeries simulate_bifurcation_network(const BifNetConfig& cfg);

struct NoiseSpec {
  double intensity = 0.0;
  std::uint64_t seed = 0;
};

/// Adds i.i.d. N(0, intensity^2) to every entry; intensity 0 is the identity.
SeriesMatrix add_observation_noise(const SeriesMatrix& X, const NoiseSpec& spec);

}  // namespace stpca
