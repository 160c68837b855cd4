#include "gmmlab/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "gmmlab/gradients.hpp"
#include "gmmlab/rng.hpp"
#include "gmmlab/weight_solver.hpp"

namespace gmmlab {

namespace {

double resolve_eps_prime(const TrainConfig& cfg, int n) {
  if (cfg.eps_prime > 0) return cfg.eps_prime;
  const double eps = cfg.target_eps > 0 ? cfg.target_eps : 1e-6;
  return eps * eps / n;
}

bool loss_reached_target(const LossEstimate& loss, double eps, bool mc) {
  if (eps <= 0) return false;
  // MC mode requires the whole 3-stderr band below the target, so noise in
  // the estimate cannot trigger the stop while the loss is still above it
  return mc ? (loss.value + 3.0 * loss.stderr_ <= eps) : (loss.value <= eps);
}

Snapshot make_snapshot(int iter, const MixtureModel& truth,
                       const MixtureModel& fit, const LossEstimate& loss,
                       double kkt, double grad_norm) {
  Snapshot s;
  s.iter = iter;
  s.loss = loss;
  s.weights = fit.weights;
  s.means = fit.means;
  s.potential_u = potential_U(fit, truth, partition(fit, truth));
  s.kkt_residual = kkt;
  s.grad_norm = grad_norm;
  return s;
}

struct IterationState {
  PointSet ps;
  Eigen::VectorXd logpstar;
};

IterationState realize_state(const ExpectationEstimator& est,
                             const MixtureModel& truth) {
  IterationState st;
  st.ps = est.realize(truth);
  st.logpstar = log_density_batch(truth, st.ps.x);
  return st;
}

Trajectory run_loop(const MixtureModel& truth, const MixtureModel& fit0,
                    const TrainConfig& cfg, bool online) {
  truth.validate();
  fit0.validate();
  if (truth.dim() != fit0.dim())
    throw std::invalid_argument("trainer: dimension mismatch");
  if (cfg.iterations < 0)
    throw std::invalid_argument("trainer: iterations must be >= 0");

  const int n = fit0.components();
  const double eta = cfg.eta > 0 ? cfg.eta : default_step_size(truth, fit0);
  const double eps_prime = resolve_eps_prime(cfg, n);
  const int snap_every = std::max(1, cfg.snapshot_every);

  const PopulationMode* pop = std::get_if<PopulationMode>(&cfg.mode);
  const OnlineMode* onl = std::get_if<OnlineMode>(&cfg.mode);
  if (online && onl == nullptr)
    throw std::invalid_argument("run_online: config mode is not Online");
  if (!online && pop == nullptr)
    throw std::invalid_argument("run_population: config mode is not Population");
  if (online && onl->batch < 1)
    throw std::invalid_argument("run_online: batch must be >= 1");

  const bool mc = online || pop->est.mode() == ExpectationEstimator::Mode::MonteCarlo;
  auto estimator_at = [&](int iter) {
    return online ? ExpectationEstimator::monte_carlo(
                        onl->base_seed + static_cast<std::uint64_t>(iter),
                        onl->batch)
                  : pop->est;
  };

  MixtureModel fit = fit0;
  Trajectory traj;

  IterationState st = realize_state(estimator_at(0), truth);
  {
    const Eigen::VectorXd mass = posterior_mass_on(st.ps, fit);
    const double kkt0 = (fit.weights - mass).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd g0 = grad_means_on(st.ps, fit);
    const LossEstimate loss0 = kl_loss_on(st.ps, st.logpstar, fit);
    traj.snapshots.push_back(
        make_snapshot(0, truth, fit, loss0, kkt0, g0.norm()));
  }

  for (int t = 1; t <= cfg.iterations; ++t) {
    if (online) st = realize_state(estimator_at(t), truth);

    WeightSolution ws = solve_weights_on(st.ps, st.logpstar, fit.means,
                                         fit.weights, eps_prime,
                                         cfg.weight_iters);
    fit.weights = ws.weights;
    const Eigen::MatrixXd grad = grad_means_on(st.ps, fit);
    const double grad_norm = grad.norm();

    if (!grad.allFinite() || !std::isfinite(ws.cert.residual)) {
      traj.aborted = true;
      traj.snapshots.push_back(make_snapshot(
          t, truth, fit, LossEstimate{std::nan(""), 0}, ws.cert.residual,
          grad_norm));
      return traj;
    }
    fit.means -= eta * grad;
    if (!fit.means.allFinite()) {
      traj.aborted = true;
      traj.snapshots.push_back(make_snapshot(
          t, truth, fit, LossEstimate{std::nan(""), 0}, ws.cert.residual,
          grad_norm));
      return traj;
    }

    if (t % snap_every == 0 || t == cfg.iterations) {
      const LossEstimate loss = kl_loss_on(st.ps, st.logpstar, fit);
      traj.snapshots.push_back(make_snapshot(t, truth, fit, loss,
                                             ws.cert.residual, grad_norm));
      if (!std::isfinite(loss.value)) {
        traj.aborted = true;
        return traj;
      }
      if (loss_reached_target(loss, cfg.target_eps, mc)) {
        traj.early_stopped = true;
        return traj;
      }
    }
  }
  return traj;
}

}  // namespace

MixtureModel init_random(const MixtureModel& truth, int n, std::uint64_t seed) {
  truth.validate();
  if (n < 1) throw std::invalid_argument("init_random: n must be >= 1");
  Eigen::MatrixXd means = sample(truth, seed, n);
  Eigen::VectorXd weights =
      Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return MixtureModel(std::move(means), std::move(weights));
}

double default_step_size(const MixtureModel& truth, const MixtureModel& fit0) {
  const Partition part = partition(fit0, truth);
  double b0_sq = 0;
  for (int i = 0; i < fit0.components(); ++i) {
    b0_sq = std::max(
        b0_sq, (fit0.means.row(i) -
                truth.means.row(part.assign[static_cast<std::size_t>(i)]))
                   .squaredNorm());
  }
  return 1.5 / (1.0 + fit0.dim() + fit0.components() + b0_sq);
}

Trajectory run_population(const MixtureModel& truth, const MixtureModel& fit0,
                          const TrainConfig& cfg) {
  return run_loop(truth, fit0, cfg, /*online=*/false);
}

Trajectory run_online(const MixtureModel& truth, const MixtureModel& fit0,
                      const TrainConfig& cfg) {
  return run_loop(truth, fit0, cfg, /*online=*/true);
}

std::vector<int> detect_pruned(const MixtureModel& fit, double threshold) {
  if (threshold < 0 || threshold >= 1)
    throw std::invalid_argument("detect_pruned: threshold must be in [0, 1)");
  std::vector<int> out;
  for (int i = 0; i < fit.components(); ++i) {
    if (fit.weights[i] <= threshold) out.push_back(i);
  }
  return out;
}

}  // namespace gmmlab
