#include "gmmlab/gradients.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmmlab {

namespace {

struct GradAcc {
  Eigen::MatrixXd m1;  // sum w * f
  Eigen::MatrixXd m2;  // sum w * f^2 (entrywise)
  double w = 0;
};

GradAcc zero_acc(int n, int d) {
  return GradAcc{Eigen::MatrixXd::Zero(n, d), Eigen::MatrixXd::Zero(n, d), 0.0};
}

void combine_acc(GradAcc& a, const GradAcc& b) {
  a.m1 += b.m1;
  a.m2 += b.m2;
  a.w += b.w;
}

// accumulates psi_i(x) (mu_i - x) per entry, second moments on demand
GradAcc direct_pass(const PointSet& ps, const MixtureModel& fit, Exec exec,
                    bool with_variance) {
  const int n = fit.components();
  const int d = fit.dim();
  return reduce_batches(
      ps.x.rows(), zero_acc(n, d),
      [&](GradAcc& a, std::int64_t lo, std::int64_t hi) {
        const auto X = ps.x.middleRows(lo, hi - lo);
        const auto w = ps.w.segment(lo, hi - lo);
        Eigen::MatrixXd psi(hi - lo, n);
        Eigen::VectorXd logp(hi - lo);
        detail::posterior_block(fit, X, psi, logp);
        const Eigen::MatrixXd wpsi = psi.array().colwise() * w.array();
        const Eigen::VectorXd e = wpsi.colwise().sum();          // sum w psi_i
        const Eigen::MatrixXd c = wpsi.transpose() * X;          // sum w psi_i x
        a.m1 += e.asDiagonal() * fit.means - c;
        a.w += w.sum();
        if (!with_variance) return;
        // second moment of psi_i (mu_i - x)_c:
        // mu^2 sum w psi^2 - 2 mu sum w psi^2 x + sum w psi^2 x^2
        const Eigen::MatrixXd psi2 = psi.array().square().matrix();
        const Eigen::MatrixXd wpsi2 = psi2.array().colwise() * w.array();
        const Eigen::VectorXd e2 = wpsi2.colwise().sum();
        const Eigen::MatrixXd b2 = wpsi2.transpose() * X;
        const Eigen::MatrixXd c2 =
            wpsi2.transpose() * X.array().square().matrix();
        a.m2 += e2.asDiagonal() * fit.means.array().square().matrix() -
                2.0 * fit.means.cwiseProduct(b2) + c2;
      },
      combine_acc, exec);
}

double stderr_from(const GradAcc& acc, const PointSet& ps,
                   const Eigen::MatrixXd& mean) {
  if (!ps.monte_carlo || ps.mc_count <= 1) return 0.0;
  const Eigen::ArrayXXd var =
      (acc.m2 / acc.w - (mean.array().square()).matrix()).array().max(0.0);
  return std::sqrt(var.sum() / static_cast<double>(ps.mc_count));
}

}  // namespace

Eigen::MatrixXd grad_means_on(const PointSet& ps, const MixtureModel& fit,
                              Exec exec) {
  const GradAcc acc = direct_pass(ps, fit, exec, /*with_variance=*/false);
  return acc.m1 / acc.w;
}

Eigen::VectorXd posterior_mass_on(const PointSet& ps, const MixtureModel& fit,
                                  Exec exec) {
  const int n = fit.components();
  using Acc = std::pair<Eigen::VectorXd, double>;
  const Acc acc = reduce_batches(
      ps.x.rows(), Acc{Eigen::VectorXd::Zero(n), 0.0},
      [&](Acc& a, std::int64_t lo, std::int64_t hi) {
        Eigen::MatrixXd psi(hi - lo, n);
        Eigen::VectorXd logp(hi - lo);
        detail::posterior_block(fit, ps.x.middleRows(lo, hi - lo), psi, logp);
        a.first +=
            (psi.array().colwise() * ps.w.segment(lo, hi - lo).array())
                .colwise()
                .sum()
                .matrix()
                .transpose();
        a.second += ps.w.segment(lo, hi - lo).sum();
      },
      [](Acc& a, const Acc& b) {
        a.first += b.first;
        a.second += b.second;
      },
      exec);
  return acc.first / acc.second;
}

Eigen::VectorXd grad_weights_on(const PointSet& ps, const MixtureModel& fit,
                                Exec exec) {
  // phi_i / p = psi_i / pi_i when pi_i > 0; computed directly from the
  // exponents so zero-weight components get their true ratio
  const int n = fit.components();
  using Acc = std::pair<Eigen::VectorXd, double>;
  const Acc acc = reduce_batches(
      ps.x.rows(), Acc{Eigen::VectorXd::Zero(n), 0.0},
      [&](Acc& a, std::int64_t lo, std::int64_t hi) {
        const auto X = ps.x.middleRows(lo, hi - lo);
        Eigen::VectorXd logp(hi - lo);
        detail::logdensity_block(fit, X, logp);
        // log phi_i(x) = -d/2 log 2pi - |x - mu_i|^2/2
        Eigen::MatrixXd T = X * fit.means.transpose();
        T.rowwise() -= 0.5 * fit.means.rowwise().squaredNorm().transpose();
        T.colwise() -= 0.5 * X.rowwise().squaredNorm();
        constexpr double kLog2Pi = 1.8378770664093454836;
        T.array() -= 0.5 * fit.dim() * kLog2Pi;
        T.colwise() -= logp;
        detail::exp_shifted(T);
        a.first += (T.array().colwise() * ps.w.segment(lo, hi - lo).array())
                       .colwise()
                       .sum()
                       .matrix()
                       .transpose();
        a.second += ps.w.segment(lo, hi - lo).sum();
      },
      [](Acc& a, const Acc& b) {
        a.first += b.first;
        a.second += b.second;
      },
      exec);
  return -acc.first / acc.second;
}

Eigen::MatrixXd grad_means_direct(const MixtureModel& truth,
                                  const MixtureModel& fit,
                                  const ExpectationEstimator& est) {
  return grad_means_direct_with_stderr(truth, fit, est).value;
}

MatrixWithStderr grad_means_direct_with_stderr(const MixtureModel& truth,
                                               const MixtureModel& fit,
                                               const ExpectationEstimator& est) {
  truth.validate();
  fit.validate();
  if (truth.dim() != fit.dim())
    throw std::invalid_argument("grad_means_direct: dimension mismatch");
  const PointSet ps = est.realize(truth);
  const GradAcc acc = direct_pass(ps, fit, default_exec(), /*with_variance=*/true);
  MatrixWithStderr out;
  out.value = acc.m1 / acc.w;
  out.stderr_ = stderr_from(acc, ps, out.value);
  return out;
}

Eigen::MatrixXd grad_means_stein(const MixtureModel& truth,
                                 const MixtureModel& fit,
                                 const ExpectationEstimator& est) {
  return grad_means_stein_with_stderr(truth, fit, est).value;
}

MatrixWithStderr grad_means_stein_with_stderr(const MixtureModel& truth,
                                              const MixtureModel& fit,
                                              const ExpectationEstimator& est) {
  truth.validate();
  fit.validate();
  if (truth.dim() != fit.dim())
    throw std::invalid_argument("grad_means_stein: dimension mismatch");
  const int n = fit.components();
  const int d = fit.dim();
  MatrixWithStderr out;
  out.value = Eigen::MatrixXd::Zero(n, d);
  double var_total = 0;
  for (int j = 0; j < truth.components(); ++j) {
    const double pj = truth.weights[j];
    if (pj == 0.0) continue;
    MixtureModel comp(truth.means.row(j), Eigen::VectorXd::Ones(1));
    const PointSet ps =
        est.substream(static_cast<std::uint64_t>(j) + 1).realize(comp);
    // per sample: psi_i(x) * (sum_k psi_k(x) mu_k - mu*_j), rank-1 rows
    const GradAcc acc = reduce_batches(
        ps.x.rows(), zero_acc(n, d),
        [&](GradAcc& a, std::int64_t lo, std::int64_t hi) {
          const auto X = ps.x.middleRows(lo, hi - lo);
          const auto w = ps.w.segment(lo, hi - lo);
          Eigen::MatrixXd psi(hi - lo, n);
          Eigen::VectorXd logp(hi - lo);
          detail::posterior_block(fit, X, psi, logp);
          Eigen::MatrixXd s = psi * fit.means;  // rows: sum_k psi_k mu_k
          s.rowwise() -= truth.means.row(j);
          const Eigen::MatrixXd wpsi = psi.array().colwise() * w.array();
          a.m1 += wpsi.transpose() * s;
          a.m2 += (psi.array().square().colwise() * w.array())
                      .matrix()
                      .transpose() *
                  s.array().square().matrix();
          a.w += w.sum();
        },
        combine_acc, default_exec());
    const Eigen::MatrixXd mean_j = acc.m1 / acc.w;
    out.value += pj * mean_j;
    if (ps.monte_carlo && ps.mc_count > 1) {
      const Eigen::ArrayXXd var =
          (acc.m2 / acc.w - mean_j.array().square().matrix()).array().max(0.0);
      var_total += pj * pj * var.sum() / static_cast<double>(ps.mc_count);
    }
  }
  out.stderr_ = std::sqrt(var_total);
  return out;
}

Eigen::VectorXd grad_weights(const MixtureModel& truth, const MixtureModel& fit,
                             const ExpectationEstimator& est) {
  truth.validate();
  fit.validate();
  if (truth.dim() != fit.dim())
    throw std::invalid_argument("grad_weights: dimension mismatch");
  const PointSet ps = est.realize(truth);
  return grad_weights_on(ps, fit);
}

GradientBundle analytic_gradients(const MixtureModel& truth,
                                  const MixtureModel& fit,
                                  const ExpectationEstimator& est) {
  const PointSet ps = est.realize(truth);
  const GradAcc acc = direct_pass(ps, fit, default_exec(), /*with_variance=*/true);
  GradientBundle out;
  out.grad_means = acc.m1 / acc.w;
  out.grad_weights = grad_weights_on(ps, fit);
  out.estimator_stderr = stderr_from(acc, ps, out.grad_means);
  return out;
}

Eigen::VectorXd simplex_tangent(const Eigen::VectorXd& grad_weights) {
  const Eigen::Index n = grad_weights.size();
  Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
  if (n == 1) return t;
  for (Eigen::Index i = 0; i < n; ++i) {
    t[i] = grad_weights[i] - grad_weights[(i + 1) % n];
  }
  return t;
}

FdGradient fd_gradient(const MixtureModel& truth, const MixtureModel& fit,
                       const ExpectationEstimator& est, double h) {
  truth.validate();
  fit.validate();
  if (!(h > 0)) throw std::invalid_argument("fd_gradient: h must be > 0");
  const int n = fit.components();
  const int d = fit.dim();

  // common random numbers: a single realized point set for every evaluation
  const PointSet ps = est.realize(truth);
  const Eigen::VectorXd logpstar = log_density_batch(truth, ps.x);
  auto loss_at = [&](const MixtureModel& m) {
    return kl_loss_on(ps, logpstar, m).value;
  };

  FdGradient out;
  out.grad_means.resize(n, d);
  out.grad_weights_tangent = Eigen::VectorXd::Zero(n);
  constexpr double eps = std::numeric_limits<double>::epsilon();

  MixtureModel probe = fit;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) {
      probe.means(i, c) = fit.means(i, c) + h;
      const double fp = loss_at(probe);
      probe.means(i, c) = fit.means(i, c) - h;
      const double fm = loss_at(probe);
      probe.means(i, c) = fit.means(i, c);
      if (std::abs(fp - fm) < 1e3 * eps * std::max(std::abs(fp), std::abs(fm)))
        ++out.conditioning_warnings;
      out.grad_means(i, c) = (fp - fm) / (2.0 * h);
    }
  }

  if (n > 1) {
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      if (fit.weights[i] < h || fit.weights[j] < h)
        throw std::invalid_argument(
            "fd_gradient: h exceeds a weight; cannot stay on the simplex");
      probe.weights[i] = fit.weights[i] + h;
      probe.weights[j] = fit.weights[j] - h;
      const double fp = loss_at(probe);
      probe.weights[i] = fit.weights[i] - h;
      probe.weights[j] = fit.weights[j] + h;
      const double fm = loss_at(probe);
      probe.weights[i] = fit.weights[i];
      probe.weights[j] = fit.weights[j];
      if (std::abs(fp - fm) < 1e3 * eps * std::max(std::abs(fp), std::abs(fm)))
        ++out.conditioning_warnings;
      out.grad_weights_tangent[i] = (fp - fm) / (2.0 * h);
    }
  }
  return out;
}

}  // namespace gmmlab
