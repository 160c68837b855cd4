#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "gmmlab/divergence.hpp"
#include "gmmlab/estimator.hpp"
#include "gmmlab/model.hpp"

namespace gmmlab {

struct PopulationMode {
  ExpectationEstimator est;
};

struct OnlineMode {
  std::int64_t batch = 1;      // N fresh samples per iteration
  std::uint64_t base_seed = 0; // iteration t draws with seed base_seed + t
};

struct TrainConfig {
  double eta = 0;          // step size; 0 = default rule
  int iterations = 0;      // T
  double target_eps = 0;   // early stop when the loss estimate reaches it
  double eps_prime = 0;    // weight subproblem accuracy; 0 = target_eps^2 / n
  int snapshot_every = 1;
  int weight_iters = 12;   // cap on EM weight updates per outer iteration
  std::variant<PopulationMode, OnlineMode> mode =
      PopulationMode{ExpectationEstimator::monte_carlo(0, 1)};
};

struct Snapshot {
  int iter = 0;
  LossEstimate loss;
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;
  double potential_u = 0;
  double kkt_residual = 0;
  double grad_norm = 0;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;  // iter strictly increasing
  bool aborted = false;  // non-finite state; last snapshot is diagnostic
  bool early_stopped = false;

  const Snapshot& front() const { return snapshots.front(); }
  const Snapshot& back() const { return snapshots.back(); }
};

// means are n i.i.d. draws from truth, weights uniform 1/n
MixtureModel init_random(const MixtureModel& truth, int n, std::uint64_t seed);

// eta = 1.5 / (1 + d + n + B0^2) with B0 the largest initial distance from a
// fit component to its nearest truth mean. Scales with the local transit
// distance so the descent lemma's monotonicity holds at desk scale.
double default_step_size(const MixtureModel& truth, const MixtureModel& fit0);

// Population gradient EM with near-optimal weight updates: each iteration
// solves the weight subproblem to eps', then takes one gradient step on the
// means. Snapshots (and the early-stop test) happen every snapshot_every
// iterations and at the end. In MC mode the early stop requires
// value + 3 stderr <= target_eps so noise alone cannot trigger it.
Trajectory run_population(const MixtureModel& truth, const MixtureModel& fit0,
                          const TrainConfig& cfg);

// Same loop over N fresh samples per iteration (seed base_seed + t); the
// snapshot loss is the empirical loss of the post-update state on that
// iteration's batch.
Trajectory run_online(const MixtureModel& truth, const MixtureModel& fit0,
                      const TrainConfig& cfg);

// indices with weight <= threshold
std::vector<int> detect_pruned(const MixtureModel& fit, double threshold);

}  // namespace gmmlab
