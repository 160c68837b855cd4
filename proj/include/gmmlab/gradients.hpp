#pragma once

#include <Eigen/Dense>

#include "gmmlab/divergence.hpp"
#include "gmmlab/estimator.hpp"
#include "gmmlab/model.hpp"

namespace gmmlab {

// Gradients of KL(truth || fit) in fit parameters.
// Sign convention: grad_weights_i = -E_{x~truth}[phi(mu_i;x)/p(x)], the true
// KL gradient, so pi_i |g_i + 1| is the KKT residual of the simplex
// subproblem and g = -1 at the optimum.
struct GradientBundle {
  Eigen::MatrixXd grad_means;    // n x d
  Eigen::VectorXd grad_weights;  // n
  double estimator_stderr = 0;   // Frobenius-aggregated, 0 for quadrature
};

// row i = E_{x~truth}[psi_i(x) (mu_i - x)]
Eigen::MatrixXd grad_means_direct(const MixtureModel& truth,
                                  const MixtureModel& fit,
                                  const ExpectationEstimator& est);

// Stein-transformed form: row i = sum_j pi*_j E_{x~N(mu*_j, I)}[psi_i(x)
// sum_k psi_k(x) (mu_k - mu*_j)]. Expectations are taken per truth component
// (MC substreams draw est.count() samples from each).
Eigen::MatrixXd grad_means_stein(const MixtureModel& truth,
                                 const MixtureModel& fit,
                                 const ExpectationEstimator& est);

Eigen::VectorXd grad_weights(const MixtureModel& truth, const MixtureModel& fit,
                             const ExpectationEstimator& est);

// all of the above in one call, with the MC stderr aggregate
GradientBundle analytic_gradients(const MixtureModel& truth,
                                  const MixtureModel& fit,
                                  const ExpectationEstimator& est);

// variants exposing the estimator noise of a single quantity
struct MatrixWithStderr {
  Eigen::MatrixXd value;
  double stderr_ = 0;  // sqrt(sum of per-entry variances of the mean)
};
MatrixWithStderr grad_means_direct_with_stderr(const MixtureModel& truth,
                                               const MixtureModel& fit,
                                               const ExpectationEstimator& est);
MatrixWithStderr grad_means_stein_with_stderr(const MixtureModel& truth,
                                              const MixtureModel& fit,
                                              const ExpectationEstimator& est);

// point-set forms for inner loops
Eigen::MatrixXd grad_means_on(const PointSet& ps, const MixtureModel& fit,
                              Exec exec = default_exec());
Eigen::VectorXd grad_weights_on(const PointSet& ps, const MixtureModel& fit,
                                Exec exec = default_exec());
// E_{x~truth}[psi_i(x)] for every i; equals -pi_i * grad_weights_i
Eigen::VectorXd posterior_mass_on(const PointSet& ps, const MixtureModel& fit,
                                  Exec exec = default_exec());

// Central-difference oracle for the analytic gradients, using common random
// numbers: every loss evaluation reuses the identical point set. Weight
// coordinates are perturbed in pairs (pi_i + h, pi_{i+1 mod n} - h), which
// stays on the simplex, so grad_weights_tangent[i] approximates the
// directional derivative along e_i - e_{i+1 mod n} (zero for n = 1).
struct FdGradient {
  Eigen::MatrixXd grad_means;
  Eigen::VectorXd grad_weights_tangent;
  int conditioning_warnings = 0;  // evaluations with |f(+h)-f(-h)| below noise
};

FdGradient fd_gradient(const MixtureModel& truth, const MixtureModel& fit,
                       const ExpectationEstimator& est, double h);

// maps an analytic weight gradient to the tangent representation above
Eigen::VectorXd simplex_tangent(const Eigen::VectorXd& grad_weights);

}  // namespace gmmlab
