#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "gmmlab/model.hpp"

namespace gmmlab {

// Dense symmetric order-k tensor over R^d, k in [1, 4]; all d^k entries are
// stored (entries invariant under index permutation).
class SymTensor {
 public:
  SymTensor() = default;
  SymTensor(int order, int dim);

  int order() const { return order_; }
  int dim() const { return dim_; }
  Eigen::VectorXd& data() { return data_; }
  const Eigen::VectorXd& data() const { return data_; }

  double& at(const std::array<int, 4>& idx) { return data_[flat(idx)]; }
  double at(const std::array<int, 4>& idx) const { return data_[flat(idx)]; }

  SymTensor& operator+=(const SymTensor& other);
  SymTensor& operator-=(const SymTensor& other);
  SymTensor& operator*=(double c);
  friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }

  // largest |T_alpha - T_perm(alpha)| over entries; 0 for exact symmetry
  double max_asymmetry() const;

  Eigen::Index flat(const std::array<int, 4>& idx) const;
  Eigen::Index size() const { return data_.size(); }

 private:
  int order_ = 0;
  int dim_ = 0;
  Eigen::VectorXd data_;
};

SymTensor outer_power(const Eigen::VectorXd& v, int k);
double inner(const SymTensor& a, const SymTensor& b);
double frob(const SymTensor& t);

// <T, v^{otimes k}>
double contract_full(const SymTensor& t, const Eigen::VectorXd& v);
// vector g with g_a = <T, e_a otimes v^{otimes k-1}>; for symmetric T the
// gradient of v -> <T, v^{otimes k}> equals k * g
Eigen::VectorXd contract_all_but_one(const SymTensor& t,
                                     const Eigen::VectorXd& v);

// max_{|v|=1} |<T, v^{otimes k}>| by projected gradient ascent on the sphere
// with deterministic random restarts and backtracking line search. A lower
// bound by construction; exact for k = 2 up to ascent tolerance.
double spectral_norm(const SymTensor& t, int restarts = 32, int iters = 200);

// sum_i pi_i mu_i^{otimes k}, k in {2, 3, 4}
SymTensor moment_tensor(const MixtureModel& model, int k);

}  // namespace gmmlab
