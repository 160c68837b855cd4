#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "gmmlab/estimator.hpp"
#include "gmmlab/model.hpp"

namespace gmmlab {

struct LossEstimate {
  double value = 0;   // nats
  double stderr_ = 0; // nats; 0 in quadrature mode
};

struct SandwichUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// KL(truth || fit), estimated with est. Quadrature mode requires d = 1 and a
// grid covering every mean of both models +- 12 standard deviations.
LossEstimate kl_loss(const MixtureModel& truth, const MixtureModel& fit,
                     const ExpectationEstimator& est);

// point-set form used in inner loops; logpstar = log truth density at ps.x
LossEstimate kl_loss_on(const PointSet& ps, const Eigen::VectorXd& logpstar,
                        const MixtureModel& fit, Exec exec = default_exec());

// chi^2(p || q) = int (p - q)^2 / q over the 1-D grid rule
double chi_square_1d(const MixtureModel& p, const MixtureModel& q, int nodes);

struct KlChi2Identity {
  double lhs = 0;  // KL(p || (1-lambda) p + lambda q)
  double rhs = 0;  // int_0^lambda chi^2(p || p_s) / s ds, composite Simpson
};

// Two independent quadratures of the same quantity. steps = Simpson panels
// (rounded up to even); the s -> 0 endpoint uses the limit value 0.
KlChi2Identity kl_chi2_identity_check(const MixtureModel& p,
                                      const MixtureModel& q, double lambda,
                                      int steps, int quad_nodes = 2048);

// Analytic KL bounds from the group decomposition. The lower bound drops the
// exp(-Theta(Delta^2)) slack (unspecified constants) and is an asymptotic
// proxy; upper >= lower always. Throws SandwichUnavailable when a group
// carries no weight.
std::pair<double, double> loss_sandwich(const MixtureModel& truth,
                                        const MixtureModel& fit,
                                        const Partition& part);

}  // namespace gmmlab
