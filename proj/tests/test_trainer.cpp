#include <doctest.h>

#include <cmath>
#include <random>

#include "gmmlab/gradients.hpp"
#include "gmmlab/trainer.hpp"
#include "oracles.hpp"

using namespace gmmlab;

namespace {

// well separated 1-D pair for desk-scale runs
MixtureModel separated_truth() {
  Eigen::MatrixXd tm(2, 1);
  tm << -7.0, 7.0;
  Eigen::VectorXd tw(2);
  tw << 0.55, 0.45;
  return MixtureModel(tm, tw);
}

TrainConfig quad_config(const MixtureModel& truth, const MixtureModel& fit0,
                        int iterations, double eta = 0) {
  TrainConfig cfg;
  cfg.eta = eta;
  cfg.iterations = iterations;
  cfg.target_eps = 1e-12;  // effectively no early stop
  cfg.eps_prime = 1e-8;
  cfg.snapshot_every = 1;
  std::vector<const MixtureModel*> models{&truth, &fit0};
  cfg.mode = PopulationMode{make_quadrature(models)};
  return cfg;
}

}  // namespace

TEST_CASE("init_random draws means from the truth and uniform weights") {
  const MixtureModel truth = separated_truth();
  const MixtureModel fit = init_random(truth, 7, 42);
  CHECK(fit.components() == 7);
  for (int i = 0; i < 7; ++i) CHECK(fit.weights[i] == 1.0 / 7);
  CHECK(init_random(truth, 7, 42).means == fit.means);
  CHECK(init_random(truth, 1, 3).components() == 1);
}

TEST_CASE("init_random covers all clusters at heavy over-parameterization") {
  // coupon collector: n = 10^4 over 5 clusters leaves none empty
  Eigen::MatrixXd tm(5, 2);
  tm << 0, 0, 30, 0, 0, 30, -30, 0, 0, -30;
  const MixtureModel truth(tm, Eigen::VectorXd::Constant(5, 0.2));
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const MixtureModel fit = init_random(truth, 10000, seed);
    const Partition part = partition(fit, truth);
    bool all = true;
    for (const auto& g : part.groups(5)) all &= !g.empty();
    covered += all;
  }
  CHECK(covered >= 99);
}

TEST_CASE("training at the optimum stays put") {
  const MixtureModel truth = separated_truth();
  const Trajectory traj =
      run_population(truth, truth, quad_config(truth, truth, 10));
  CHECK(traj.snapshots.size() >= 2);
  CHECK((traj.back().means - truth.means).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("desk-scale 1-D run converges with monotone loss") {
  // one truth Gaussian, two fit components (m = 1, n = 2)
  const MixtureModel truth(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
  const MixtureModel fit0 = init_random(truth, 2, 5);
  TrainConfig cfg = quad_config(truth, fit0, 500, 0.1);
  const Trajectory traj = run_population(truth, fit0, cfg);
  for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
    REQUIRE(traj.snapshots[k].loss.value <=
            traj.snapshots[k - 1].loss.value + 1e-10);
    REQUIRE(traj.snapshots[k].iter > traj.snapshots[k - 1].iter);
  }
  CHECK(traj.back().loss.value <= 1e-6);
}

TEST_CASE("T = 0 yields only the initial snapshot") {
  const MixtureModel truth = separated_truth();
  const MixtureModel fit0 = init_random(truth, 3, 1);
  const Trajectory traj =
      run_population(truth, fit0, quad_config(truth, fit0, 0));
  CHECK(traj.snapshots.size() == 1);
  CHECK(traj.front().iter == 0);
}

TEST_CASE("trajectories are deterministic and weights stay on the simplex") {
  const MixtureModel truth = separated_truth();
  const MixtureModel fit0 = init_random(truth, 4, 11);
  TrainConfig cfg = quad_config(truth, fit0, 50);
  const Trajectory a = run_population(truth, fit0, cfg);
  const Trajectory b = run_population(truth, fit0, cfg);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    REQUIRE(a.snapshots[k].means == b.snapshots[k].means);
    REQUIRE(a.snapshots[k].weights == b.snapshots[k].weights);
    REQUIRE(a.snapshots[k].loss.value == b.snapshots[k].loss.value);
    REQUIRE(std::abs(a.snapshots[k].weights.sum() - 1.0) <= 1e-10);
  }
}

TEST_CASE("potential U stays bounded on well-separated instances") {
  const MixtureModel truth = separated_truth();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const MixtureModel fit0 = init_random(truth, 5, seed);
    TrainConfig cfg = quad_config(truth, fit0, 150);
    cfg.snapshot_every = 5;
    const Trajectory traj = run_population(truth, fit0, cfg);
    const double u0 = traj.front().potential_u;
    for (const Snapshot& s : traj.snapshots) {
      REQUIRE(s.potential_u <= 1.05 * u0 + 1e-12);
    }
  }
}

TEST_CASE("MC population mode is deterministic and early stop works") {
  const MixtureModel truth = separated_truth();
  const MixtureModel fit0 = init_random(truth, 3, 2);
  TrainConfig cfg;
  cfg.iterations = 400;
  cfg.target_eps = 2e-3;
  cfg.snapshot_every = 10;
  cfg.eta = 0.2;
  cfg.mode = PopulationMode{ExpectationEstimator::monte_carlo(77, 20000)};
  const Trajectory a = run_population(truth, fit0, cfg);
  const Trajectory b = run_population(truth, fit0, cfg);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  CHECK(a.back().means == b.back().means);
  if (a.early_stopped) {
    CHECK(a.back().loss.value + 3 * a.back().loss.stderr_ <= cfg.target_eps);
  }
}

TEST_CASE("online mode runs with tiny batches and matches population in the limit") {
  const MixtureModel truth = separated_truth();
  const MixtureModel fit0 = init_random(truth, 2, 3);

  TrainConfig tiny;
  tiny.iterations = 5;
  tiny.eta = 0.05;
  tiny.target_eps = 1e-12;
  tiny.mode = OnlineMode{1, 99};  // N = 1 is legal, extreme variance allowed
  const Trajectory t = run_online(truth, fit0, tiny);
  CHECK_FALSE(t.aborted);
  CHECK(t.snapshots.size() >= 2);

  // single-iteration empirical gradient at N = 10^6 ~ population gradient
  std::vector<const MixtureModel*> models{&truth, &fit0};
  const Eigen::MatrixXd pop =
      grad_means_direct(truth, fit0, make_quadrature(models));
  const auto big = ExpectationEstimator::monte_carlo(12345, 1000000);
  const MatrixWithStderr emp = grad_means_direct_with_stderr(truth, fit0, big);
  CHECK((emp.value - pop).norm() <= 3.0 * emp.stderr_);
}

TEST_CASE("non-finite abort flushes a diagnostic snapshot") {
  const MixtureModel truth = separated_truth();
  const MixtureModel fit0 = init_random(truth, 2, 4);
  TrainConfig cfg = quad_config(truth, fit0, 50, /*eta=*/1e150);
  const Trajectory traj = run_population(truth, fit0, cfg);
  CHECK(traj.aborted);
  CHECK(traj.snapshots.size() >= 2);
}

TEST_CASE("detect_pruned thresholds") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(10, 1);
  m.col(0).setLinSpaced(10, 0.0, 9.0);
  const MixtureModel uniform(m, Eigen::VectorXd::Constant(10, 0.1));
  CHECK(detect_pruned(uniform, 1e-3).empty());

  Eigen::VectorXd w(3);
  w << 0.5, 0.5, 0.0;
  const MixtureModel with_zero(Eigen::MatrixXd::Zero(3, 2), w);
  const auto pruned = detect_pruned(with_zero, 0.0);
  REQUIRE(pruned.size() == 1);
  CHECK(pruned[0] == 2);
  CHECK_THROWS_AS(detect_pruned(with_zero, 1.0), std::invalid_argument);
}
