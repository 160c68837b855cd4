#include "gmmlab/identifiability.hpp"

#include <cmath>

namespace gmmlab {

WhiteningResult whitening(const MixtureModel& truth) {
  truth.validate();
  const int m = truth.components();
  const int d = truth.dim();
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < m; ++i) {
    m2.noalias() +=
        truth.weights[i] * truth.means.row(i).transpose() * truth.means.row(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m2);
  const Eigen::VectorXd evals = eig.eigenvalues().reverse();
  Eigen::MatrixXd evecs = eig.eigenvectors().rowwise().reverse();

  const double lam_max = evals[0];
  int rank = 0;
  for (int i = 0; i < d; ++i) {
    if (evals[i] > 1e-10 * std::max(lam_max, 0.0)) ++rank;
  }
  if (rank < m) throw WhiteningError(rank, m);

  WhiteningResult wr;
  wr.rank = m;
  wr.sigma = evals.head(m);
  const double lam_min = evals[m - 1];
  Eigen::VectorXd scale(d);
  for (int i = 0; i < d; ++i) {
    scale[i] = 1.0 / std::sqrt(i < m ? evals[i] : lam_min);
  }
  wr.w = evecs * scale.asDiagonal();
  return wr;
}

Eigen::MatrixXd whitened_truth_means(const MixtureModel& truth,
                                     const WhiteningResult& wr) {
  Eigen::MatrixXd wm = truth.means * wr.w;  // rows mu*_i^T W = (W^T mu*_i)^T
  for (int i = 0; i < truth.components(); ++i) {
    wm.row(i) *= std::sqrt(truth.weights[i]);
  }
  return wm;
}

double tensor_error(const MixtureModel& truth, const MixtureModel& fit, int k,
                    const WhiteningResult& wr, int restarts, int iters) {
  if (k < 2 || k > 4)
    throw std::invalid_argument("tensor_error: k must be in {2, 3, 4}");
  if (truth.dim() != fit.dim())
    throw std::invalid_argument("tensor_error: dimension mismatch");
  const Eigen::MatrixXd truth_w = whitened_truth_means(truth, wr);
  const Eigen::MatrixXd fit_w = fit.means * wr.w;

  SymTensor t(k, truth.dim());
  for (int l = 0; l < truth.components(); ++l) {
    SymTensor part = outer_power(truth_w.row(l).transpose(), k);
    part *= std::pow(truth.weights[l], 1.0 - 0.5 * k);
    t += part;
  }
  for (int i = 0; i < fit.components(); ++i) {
    if (fit.weights[i] == 0.0) continue;
    SymTensor part = outer_power(fit_w.row(i).transpose(), k);
    part *= fit.weights[i];
    t -= part;
  }
  return spectral_norm(t, restarts, iters);
}

IdDiagnostics id_diagnostics(const MixtureModel& truth, const MixtureModel& fit,
                             const Partition& part, double delta_close) {
  if (truth.dim() != fit.dim())
    throw std::invalid_argument("id_diagnostics: dimension mismatch");
  if (static_cast<int>(part.assign.size()) != fit.components())
    throw std::invalid_argument("id_diagnostics: partition size mismatch");
  const int m = truth.components();
  IdDiagnostics diag;
  diag.weighted_distance = Eigen::VectorXd::Zero(m);
  diag.group_weight_error = Eigen::VectorXd::Zero(m);
  diag.closeby_weight = Eigen::VectorXd::Zero(m);
  diag.avg_component_error = Eigen::VectorXd::Zero(m);

  Eigen::MatrixXd group_mean = Eigen::MatrixXd::Zero(m, truth.dim());
  for (int i = 0; i < fit.components(); ++i) {
    const int l = part.assign[static_cast<std::size_t>(i)];
    const double pi = fit.weights[i];
    const double dist = (fit.means.row(i) - truth.means.row(l)).norm();
    diag.weighted_distance[l] += pi * dist * dist;
    diag.group_weight_error[l] += pi;
    if (dist <= delta_close) diag.closeby_weight[l] += pi;
    group_mean.row(l) += pi * fit.means.row(i);
  }
  for (int l = 0; l < m; ++l) {
    diag.group_weight_error[l] -= truth.weights[l];
    diag.avg_component_error[l] =
        (group_mean.row(l) - truth.weights[l] * truth.means.row(l)).norm();
  }
  return diag;
}

}  // namespace gmmlab
