#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gmmlab/parallel.hpp"

namespace gmmlab {

// Isotropic (unit covariance) Gaussian mixture. Serves both as ground truth
// and as the fit model. Components with weight exactly zero are legal states
// and are never dropped.
struct MixtureModel {
  Eigen::MatrixXd means;    // n x d, one component per row
  Eigen::VectorXd weights;  // n, nonnegative, sums to 1 within 1e-12

  MixtureModel() = default;
  MixtureModel(Eigen::MatrixXd means_in, Eigen::VectorXd weights_in);

  int components() const { return static_cast<int>(means.rows()); }
  int dim() const { return static_cast<int>(means.cols()); }

  // throws std::invalid_argument when the invariants fail
  void validate() const;

  MixtureModel translated(const Eigen::VectorXd& offset) const;
};

// Assignment of each fit component to its nearest ground-truth mean,
// ties broken by the lowest truth index.
struct Partition {
  std::vector<int> assign;  // assign[i] in [0, m)

  std::vector<std::vector<int>> groups(int truth_components) const;
};

struct AssumptionReport {
  double lambda_min = 0;  // m-th largest eigenvalue of the second moment
  double lambda_max = 0;
  double d_min = 0;  // mean norm bounds
  double d_max = 0;
  double delta = 0;  // minimum pairwise separation
  double pi_min_star = 0;
  // the three separation terms; separated_ok tests delta >= their max (C=1,
  // a heuristic stand-in for the unspecified constant)
  double sep_term_log = 0;
  double sep_term_bound = 0;
  double sep_term_dim = 0;
  bool rank_ok = false;
  bool bounded_ok = false;
  bool separated_ok = false;
};

// log p(x); computed with a max-shifted log-sum-exp so separations large
// enough to underflow raw exponentials stay finite.
double log_density(const MixtureModel& model, const Eigen::VectorXd& x);

// batched variant, one row of X per evaluation point
Eigen::VectorXd log_density_batch(const MixtureModel& model,
                                  const Eigen::MatrixXd& X,
                                  Exec exec = default_exec());

// membership weights psi_i(x) = pi_i phi(mu_i;x)/p(x); sums to one
Eigen::VectorXd posterior(const MixtureModel& model, const Eigen::VectorXd& x);

Eigen::MatrixXd posterior_batch(const MixtureModel& model,
                                const Eigen::MatrixXd& X,
                                Exec exec = default_exec());

// count i.i.d. draws, one per row; deterministic in (seed, row index)
Eigen::MatrixXd sample(const MixtureModel& model, std::uint64_t seed,
                       std::int64_t count, Exec exec = default_exec());

Partition partition(const MixtureModel& fit, const MixtureModel& truth);

// U = sum_l sum_{i in S_l} ||mu_i - mu*_l||^2
double potential_U(const MixtureModel& fit, const MixtureModel& truth,
                   const Partition& part);

// Evaluates the non-degeneracy, boundedness and separation assumptions.
// n is the intended fit-model size (the boundedness inequality couples the
// truth geometry to it). m > dim yields rank_ok = false, not an exception.
AssumptionReport check_assumptions(const MixtureModel& truth, int n);

// Moves the origin to the midpoint of the closest pair of truth means; all
// shifted norms then lie in [delta/2, D_max of pairwise distances].
std::pair<MixtureModel, Eigen::VectorXd> recenter(const MixtureModel& truth);

namespace detail {

// in-place exp of shifted exponents; entries below -350 become exactly 0
// (invisible at double precision, avoids subnormal-range slowdowns)
void exp_shifted(Eigen::MatrixXd& t);

// block kernels shared by the expectation/gradient passes; no validation
void logdensity_block(const MixtureModel& model,
                      const Eigen::Ref<const Eigen::MatrixXd>& X,
                      Eigen::Ref<Eigen::VectorXd> out);

void posterior_block(const MixtureModel& model,
                     const Eigen::Ref<const Eigen::MatrixXd>& X,
                     Eigen::Ref<Eigen::MatrixXd> psi,
                     Eigen::Ref<Eigen::VectorXd> logp);

}  // namespace detail

}  // namespace gmmlab
