#pragma once

#include <Eigen/Dense>

#include "gmmlab/estimator.hpp"
#include "gmmlab/tensor.hpp"

namespace gmmlab {

// Probabilists' Hermite polynomial He_k(u), k <= 8, by the three-term
// recurrence He_{k+1} = u He_k - k He_{k-1}.
double he_scalar(int k, double u);

// <He_k(x), v^{otimes k}> = |v|^k He_k(<v,x>/|v|); 1 for k = 0, 0 for v = 0
// and k >= 1. Never materializes the tensor.
double he_contract(int k, const Eigen::VectorXd& x, const Eigen::VectorXd& v);

// Moment identity E_{x~N(mu,I)}[He_k(x)] = mu^{otimes k}, checked entrywise.
// Dense-tensor path, gated to k <= 4 and d <= 6.
struct MomentIdentityCheck {
  SymTensor lhs;         // estimated expectation
  SymTensor rhs;         // outer power of mu
  SymTensor stderr_;     // per-entry standard error (zero for quadrature)
  double frob_discrepancy = 0;
  double frob_stderr = 0;  // sqrt of summed per-entry variances
};
MomentIdentityCheck moment_identity_check(int k, const Eigen::VectorXd& mu,
                                          const ExpectationEstimator& est);

// E_{x~N(0,I)}[<He_j, s^j><He_k, t^k>] against the target k!<s,t>^k (j = k)
// or 0 (j != k); j, k <= 4.
struct OrthogonalityCheck {
  double estimate = 0;
  double target = 0;
  double stderr_ = 0;
};
OrthogonalityCheck orthogonality_check(int j, int k, const Eigen::VectorXd& s,
                                       const Eigen::VectorXd& t,
                                       const ExpectationEstimator& est);

// closed form of E_{x~N(mu,I)}[<He_k(x), v^{otimes k}>^2] =
// sum_j j! C(k,j)^2 <mu,v>^{2k-2j} |v|^{2j}, k <= 4
double translation_second_moment(int k, const Eigen::VectorXd& mu,
                                 const Eigen::VectorXd& v);

}  // namespace gmmlab
