#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "gmmlab/model.hpp"
#include "gmmlab/tensor.hpp"

namespace gmmlab {

struct WhiteningError : std::runtime_error {
  explicit WhiteningError(int rank_in, int needed_in)
      : std::runtime_error("whitening failed: second moment has rank " +
                           std::to_string(rank_in) + ", need " +
                           std::to_string(needed_in)),
        detected_rank(rank_in),
        needed(needed_in) {}
  int detected_rank;
  int needed;
};

// W^T M2* W = diag(I_m, 0); scaled truth means sqrt(pi*_i) W^T mu*_i become
// orthonormal on the rank-m subspace.
struct WhiteningResult {
  Eigen::MatrixXd w;      // d x d
  int rank = 0;           // detected rank of M2* (= m on success)
  Eigen::VectorXd sigma;  // retained eigenvalues, descending
};

// Rank is detected with the eigenvalue cutoff 1e-10 * lambda_max; a detected
// rank below m throws WhiteningError.
WhiteningResult whitening(const MixtureModel& truth);

// rows i = sqrt(pi*_i) W^T mu*_i
Eigen::MatrixXd whitened_truth_means(const MixtureModel& truth,
                                     const WhiteningResult& wr);

// spectral norm of T_k = sum_l (pi*_l)^{1-k/2} (mu~*_l)^{otimes k}
//                      - sum_i pi_i (W^T mu_i)^{otimes k},  k in {2,3,4}
double tensor_error(const MixtureModel& truth, const MixtureModel& fit, int k,
                    const WhiteningResult& wr, int restarts = 32,
                    int iters = 200);

// The four per-group identifiability metrics. group_weight_error is signed;
// the rest are nonnegative.
struct IdDiagnostics {
  Eigen::VectorXd weighted_distance;    // sum_{i in S_l} pi_i |mu_i - mu*_l|^2
  Eigen::VectorXd group_weight_error;   // hat pi_l - pi*_l
  Eigen::VectorXd closeby_weight;       // weight within delta_close of mu*_l
  Eigen::VectorXd avg_component_error;  // |sum pi_i mu_i - pi*_l mu*_l|
};

IdDiagnostics id_diagnostics(const MixtureModel& truth, const MixtureModel& fit,
                             const Partition& part, double delta_close);

}  // namespace gmmlab
