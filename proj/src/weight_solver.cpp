#include "gmmlab/weight_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace gmmlab {

double kkt_residual(const Eigen::VectorXd& weights,
                    const Eigen::VectorXd& grad_weights) {
  if (weights.size() != grad_weights.size())
    throw std::invalid_argument("kkt_residual: size mismatch");
  return (weights.array() * (grad_weights.array() + 1.0).abs()).maxCoeff();
}

WeightSolution solve_weights_on(const PointSet& ps,
                                const Eigen::VectorXd& logpstar,
                                const Eigen::MatrixXd& means,
                                Eigen::VectorXd weights, double eps_prime,
                                int max_iters, Exec exec) {
  if (!(eps_prime > 0))
    throw std::invalid_argument("solve_weights: eps_prime must be > 0");
  if (max_iters < 0)
    throw std::invalid_argument("solve_weights: max_iters must be >= 0");
  const int n = static_cast<int>(means.rows());

  WeightSolution sol;
  sol.weights = weights;
  double best_residual = std::numeric_limits<double>::infinity();

  struct Acc {
    Eigen::VectorXd mass;
    double wsum = 0;
    double loss = 0;
  };
  MixtureModel cur(means, weights);
  for (int it = 0;; ++it) {
    cur.weights = weights;
    const Acc acc = reduce_batches(
        ps.x.rows(), Acc{Eigen::VectorXd::Zero(n), 0.0, 0.0},
        [&](Acc& a, std::int64_t lo, std::int64_t hi) {
          const auto w = ps.w.segment(lo, hi - lo);
          Eigen::MatrixXd psi(hi - lo, n);
          Eigen::VectorXd logp(hi - lo);
          detail::posterior_block(cur, ps.x.middleRows(lo, hi - lo), psi, logp);
          a.mass += (psi.array().colwise() * w.array())
                        .colwise()
                        .sum()
                        .matrix()
                        .transpose();
          a.wsum += w.sum();
          a.loss +=
              (w.array() * (logpstar.segment(lo, hi - lo) - logp).array()).sum();
        },
        [](Acc& a, const Acc& b) {
          a.mass += b.mass;
          a.wsum += b.wsum;
          a.loss += b.loss;
        },
        exec);
    const Eigen::VectorXd mass = acc.mass / acc.wsum;
    sol.loss_trace.push_back(acc.loss / acc.wsum);
    // pi_i (g_i + 1) = pi_i - E[psi_i], so the residual needs no extra pass
    const double residual = (weights - mass).cwiseAbs().maxCoeff();
    if (residual < best_residual) {
      best_residual = residual;
      sol.weights = weights;
      sol.cert.iterations = it;
    }
    if (residual <= 2.0 * eps_prime) {
      sol.weights = weights;
      sol.cert = KktCertificate{residual, it, true};
      return sol;
    }
    if (it >= max_iters) break;
    weights = mass / mass.sum();
  }
  sol.cert.residual = best_residual;
  sol.cert.converged = false;
  return sol;
}

WeightSolution solve_weights(const MixtureModel& truth,
                             const Eigen::MatrixXd& means,
                             const Eigen::VectorXd& init_weights,
                             const ExpectationEstimator& est, double eps_prime,
                             int max_iters) {
  truth.validate();
  if (means.cols() != truth.dim())
    throw std::invalid_argument("solve_weights: dimension mismatch");
  if (means.rows() != init_weights.size())
    throw std::invalid_argument("solve_weights: means/weights mismatch");
  if ((init_weights.array() < 0).any() ||
      std::abs(init_weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("solve_weights: init weights not on the simplex");
  const PointSet ps = est.realize(truth);
  const Eigen::VectorXd logpstar = log_density_batch(truth, ps.x);
  return solve_weights_on(ps, logpstar, means, init_weights, eps_prime,
                          max_iters);
}

}  // namespace gmmlab
