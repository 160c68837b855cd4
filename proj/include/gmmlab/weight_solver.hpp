#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmmlab/estimator.hpp"
#include "gmmlab/model.hpp"

namespace gmmlab {

// First-order optimality certificate for the simplex weight subproblem:
// residual = max_i pi_i |grad_i + 1|, the eps'-optimality condition.
struct KktCertificate {
  double residual = 0;
  int iterations = 0;  // multiplicative updates applied
  bool converged = false;
};

double kkt_residual(const Eigen::VectorXd& weights,
                    const Eigen::VectorXd& grad_weights);

struct WeightSolution {
  Eigen::VectorXd weights;
  KktCertificate cert;
  // loss at each visited iterate (value per pass, including the last);
  // exact in quadrature mode, estimate in MC mode
  std::vector<double> loss_trace;
};

// Fixed-point EM iteration pi_i <- E_{x~truth}[psi_i(x)] until
// residual <= 2 eps' or max_iters updates. The iteration is the exact MM
// ascent of the convex-in-pi subproblem, so the loss trace is non-increasing
// up to estimator noise; zero weights are absorbing. When max_iters is
// exhausted the best-residual iterate is returned with converged = false.
WeightSolution solve_weights(const MixtureModel& truth,
                             const Eigen::MatrixXd& means,
                             const Eigen::VectorXd& init_weights,
                             const ExpectationEstimator& est, double eps_prime,
                             int max_iters);

// point-set form reused by the trainer; logpstar = log truth density at ps.x
WeightSolution solve_weights_on(const PointSet& ps,
                                const Eigen::VectorXd& logpstar,
                                const Eigen::MatrixXd& means,
                                Eigen::VectorXd weights, double eps_prime,
                                int max_iters, Exec exec = default_exec());

}  // namespace gmmlab
