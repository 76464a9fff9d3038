#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "stpca/error.hpp"
#include "stpca/synth.hpp"

using namespace stpca;

namespace {

// Plain single-oscillator RK4, independent of the library's integrator.
Eigen::Vector3d lorenz_rk4(Eigen::Vector3d s, int steps, double dt) {
  auto f = [](const Eigen::Vector3d& v) {
    return Eigen::Vector3d(10.0 * (v(1) - v(0)), v(0) * (28.0 - v(2)) - v(1), v(0) * v(1) - 8.0 / 3.0 * v(2));
  };
  for (int i = 0; i < steps; ++i) {
    const Eigen::Vector3d k1 = f(s), k2 = f(s + 0.5 * dt * k1), k3 = f(s + 0.5 * dt * k2), k4 = f(s + dt * k3);
    s += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return s;
}

Eigen::MatrixXd jacobian(const BifNetConfig& cfg, double p, const Eigen::VectorXd& x) {
  const Eigen::Index N = x.size();
  Eigen::MatrixXd J(N, N);
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < N; ++j) {
    Eigen::VectorXd a = x, b = x;
    a(j) += h;
    b(j) -= h;
    J.col(j) = (bifurcation_drift(cfg, p, a) - bifurcation_drift(cfg, p, b)) / (2 * h);
  }
  return J;
}

}  // namespace

TEST_CASE("coupled Lorenz: determinism, shape, labels") {
  LorenzConfig cfg;
  cfg.n = 9;
  cfg.m = 40;
  cfg.coupling = 1.0;
  cfg.seed = 5;
  SeriesMatrix a = simulate_coupled_lorenz(cfg), b = simulate_coupled_lorenz(cfg);
  CHECK(a.values() == b.values());
  CHECK(a.variables() == 9);
  CHECK(a.timePoints() == 40);
  CHECK(a.variableNames()[4] == "y2");
  cfg.seed = 6;
  CHECK(simulate_coupled_lorenz(cfg).values() != a.values());

  cfg.n = 8;
  CHECK_THROWS_AS(simulate_coupled_lorenz(cfg), ParameterError);
  cfg.n = 3;
  cfg.dt = 0.05;
  CHECK_THROWS_AS(simulate_coupled_lorenz(cfg), ParameterError);
}

TEST_CASE("uncoupled Lorenz matches a reference integrator and stays on the attractor") {
  LorenzConfig cfg;
  cfg.n = 3;
  cfg.m = 2000;
  cfg.seed = 11;
  SeriesMatrix X = simulate_coupled_lorenz(cfg);
  for (int k : {0, 500, 1998}) {
    Eigen::Vector3d next = lorenz_rk4(X.values().col(k), cfg.sampleEvery, cfg.dt);
    CHECK((next - X.values().col(k + 1)).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK(X.values().row(0).cwiseAbs().maxCoeff() <= 25.0);
  CHECK(X.values().row(1).cwiseAbs().maxCoeff() <= 30.0);
  CHECK(X.values().row(2).minCoeff() >= 0.0);
  CHECK(X.values().row(2).maxCoeff() <= 50.0);
}

TEST_CASE("a million RK4 steps stay finite") {
  LorenzConfig cfg;
  cfg.n = 6;
  cfg.coupling = 2.0;
  cfg.m = 100000;
  cfg.sampleEvery = 10;
  SeriesMatrix X = simulate_coupled_lorenz(cfg);
  CHECK(X.values().allFinite());
}

TEST_CASE("bifurcation parameter schedule") {
  for (auto kind : {BifurcationKind::kFold, BifurcationKind::kHopf}) {
    BifNetConfig cfg = BifNetConfig::defaults(kind);
    CHECK(bifurcation_parameter(cfg, cfg.tauStar) == 0.0);
    CHECK(bifurcation_parameter(cfg, 1) == doctest::Approx(-1.0));
    CHECK(bifurcation_parameter(cfg, cfg.tauSteps) == doctest::Approx(0.3));
    CHECK(bifurcation_parameter(cfg, cfg.tauStar - 1) < 0.0);
    CHECK(bifurcation_parameter(cfg, cfg.tauStar + 1) > 0.0);
  }
  CHECK(BifNetConfig::defaults(BifurcationKind::kFold).nodes == 18);
  CHECK(BifNetConfig::defaults(BifurcationKind::kHopf).nodes == 16);
  CHECK(BifNetConfig::defaults(BifurcationKind::kHopf).tauStar == 210);
}

TEST_CASE("equilibria are stable well before the tipping point") {
  for (auto kind : {BifurcationKind::kFold, BifurcationKind::kHopf}) {
    BifNetConfig cfg = BifNetConfig::defaults(kind);
    for (int tau : {1, 50, cfg.tauStar - 60}) {
      const double p = bifurcation_parameter(cfg, tau);
      const Eigen::VectorXd eq = bifurcation_equilibrium(cfg, p);
      CHECK(bifurcation_drift(cfg, p, eq).cwiseAbs().maxCoeff() < 1e-12);
      Eigen::EigenSolver<Eigen::MatrixXd> es(jacobian(cfg, p, eq));
      CHECK(es.eigenvalues().real().maxCoeff() < 0.0);
    }
  }
}

TEST_CASE("fold network tracks the stable branch and is deterministic") {
  BifNetConfig cfg = BifNetConfig::defaults(BifurcationKind::kFold);
  cfg.seed = 3;
  BifurcationSeries a = simulate_bifurcation_network(cfg);
  BifurcationSeries b = simulate_bifurcation_network(cfg);
  CHECK(a.data.values() == b.data.values());
  CHECK(a.tauStar == 200);
  CHECK(a.data.variables() == 18);
  CHECK(a.data.timePoints() == 300);
  CHECK(a.data.timeIndex().front() == 1.0);
  double dev = 0.0;
  int count = 0;
  for (int tau = 1; tau < cfg.tauStar; ++tau) {
    const double branch = std::sqrt(-bifurcation_parameter(cfg, tau));
    for (int i = 0; i < cfg.nodes; ++i, ++count) dev += std::abs(a.data.values()(i, tau - 1) - branch);
  }
  CHECK(dev / count < 3 * cfg.noise);
  // Past the fold the branch is gone and the nodes leave it.
  CHECK(a.data.values().col(299).maxCoeff() < 0.0);
}

TEST_CASE("hopf network oscillates after the tipping point") {
  BifNetConfig cfg = BifNetConfig::defaults(BifurcationKind::kHopf);
  cfg.seed = 2;
  BifurcationSeries s = simulate_bifurcation_network(cfg);
  CHECK(s.data.variables() == 16);
  CHECK(s.data.timePoints() == 310);
  const Eigen::MatrixXd& X = s.data.values();
  const double before = X.middleCols(100, 50).cwiseAbs().mean();
  const double after = X.rightCols(50).cwiseAbs().mean();
  CHECK(after > 5 * before);

  cfg.nodes = 15;
  CHECK_THROWS_AS(simulate_bifurcation_network(cfg), ParameterError);
  cfg = BifNetConfig::defaults(BifurcationKind::kFold);
  cfg.tauStar = cfg.tauSteps + 1;
  CHECK_THROWS_AS(simulate_bifurcation_network(cfg), ParameterError);
  cfg.tauStar = 10;
  cfg.nodes = 1;
  CHECK_THROWS_AS(simulate_bifurcation_network(cfg), ParameterError);
}

TEST_CASE("observation noise") {
  std::mt19937_64 rng(79);
  SeriesMatrix X(oracle::random_matrix(rng, 60, 50));
  CHECK(add_observation_noise(X, {0.0, 1}).values() == X.values());
  SeriesMatrix a = add_observation_noise(X, {20.0, 9}), b = add_observation_noise(X, {20.0, 9});
  CHECK(a.values() == b.values());
  CHECK(add_observation_noise(X, {20.0, 10}).values() != a.values());
  const Eigen::MatrixXd d = a.values() - X.values();
  const double mean = d.mean();
  const double sd = std::sqrt((d.array() - mean).square().sum() / double(d.size() - 1));
  CHECK(sd == doctest::Approx(20.0).epsilon(0.05));
}
