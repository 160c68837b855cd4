#include "gmmlab/divergence.hpp"

#include <cmath>

namespace gmmlab {

namespace {

struct MomentAcc {
  double s0 = 0, s1 = 0, s2 = 0;
};

MixtureModel convex_combination(const MixtureModel& p, const MixtureModel& q,
                                double lambda) {
  const int np = p.components(), nq = q.components();
  Eigen::MatrixXd means(np + nq, p.dim());
  means.topRows(np) = p.means;
  means.bottomRows(nq) = q.means;
  Eigen::VectorXd w(np + nq);
  w.head(np) = (1.0 - lambda) * p.weights;
  w.tail(nq) = lambda * q.weights;
  // zero-weight components are retained; normalize away rounding residue
  w /= w.sum();
  return MixtureModel(std::move(means), std::move(w));
}

}  // namespace

LossEstimate kl_loss_on(const PointSet& ps, const Eigen::VectorXd& logpstar,
                        const MixtureModel& fit, Exec exec) {
  const MomentAcc acc = reduce_batches(
      ps.x.rows(), MomentAcc{},
      [&](MomentAcc& a, std::int64_t lo, std::int64_t hi) {
        Eigen::VectorXd logp(hi - lo);
        detail::logdensity_block(fit, ps.x.middleRows(lo, hi - lo), logp);
        for (std::int64_t s = lo; s < hi; ++s) {
          const double f = logpstar[s] - logp[s - lo];
          const double w = ps.w[s];
          a.s0 += w;
          a.s1 += w * f;
          a.s2 += w * f * f;
        }
      },
      [](MomentAcc& a, const MomentAcc& b) {
        a.s0 += b.s0;
        a.s1 += b.s1;
        a.s2 += b.s2;
      },
      exec);
  LossEstimate out;
  out.value = acc.s1 / acc.s0;
  if (ps.monte_carlo && ps.mc_count > 1) {
    const double var = std::max(0.0, acc.s2 / acc.s0 - out.value * out.value);
    out.stderr_ = std::sqrt(var / static_cast<double>(ps.mc_count));
  }
  return out;
}

LossEstimate kl_loss(const MixtureModel& truth, const MixtureModel& fit,
                     const ExpectationEstimator& est) {
  truth.validate();
  fit.validate();
  if (truth.dim() != fit.dim())
    throw std::invalid_argument("kl_loss: dimension mismatch");
  if (est.mode() == ExpectationEstimator::Mode::Quadrature1d) {
    if (truth.dim() != 1)
      throw std::invalid_argument("kl_loss: quadrature requires d = 1");
    if (!est.grid_covers(truth.means, 12.0) || !est.grid_covers(fit.means, 12.0))
      throw std::invalid_argument(
          "kl_loss: quadrature grid must cover all means +- 12");
  }
  const PointSet ps = est.realize(truth);
  const Eigen::VectorXd logpstar = log_density_batch(truth, ps.x);
  return kl_loss_on(ps, logpstar, fit);
}

double chi_square_1d(const MixtureModel& p, const MixtureModel& q, int nodes) {
  p.validate();
  q.validate();
  if (p.dim() != 1 || q.dim() != 1)
    throw std::invalid_argument("chi_square_1d: requires d = 1");
  const double lo = std::min(p.means.minCoeff(), q.means.minCoeff()) - 12.0;
  const double hi = std::max(p.means.maxCoeff(), q.means.maxCoeff()) + 12.0;
  Eigen::VectorXd xv(1);
  return integrate_1d(lo, hi, nodes, [&](double x) {
    xv[0] = x;
    const double pd = std::exp(log_density(p, xv));
    const double qd = std::exp(log_density(q, xv));
    const double diff = pd - qd;
    if (diff == 0.0) return 0.0;
    return diff * diff / qd;
  });
}

KlChi2Identity kl_chi2_identity_check(const MixtureModel& p,
                                      const MixtureModel& q, double lambda,
                                      int steps, int quad_nodes) {
  p.validate();
  q.validate();
  if (p.dim() != 1 || q.dim() != 1)
    throw std::invalid_argument("kl_chi2_identity_check: requires d = 1");
  if (!(lambda > 0.0) || lambda > 1.0)
    throw std::invalid_argument("kl_chi2_identity_check: lambda must be in (0,1]");
  if (steps < 2) throw std::invalid_argument("kl_chi2_identity_check: steps < 2");

  KlChi2Identity out;
  const MixtureModel p_lambda = convex_combination(p, q, lambda);
  const ExpectationEstimator quad = make_quadrature({&p, &q}, quad_nodes);
  out.lhs = kl_loss(p, p_lambda, quad).value;

  // composite Simpson on g(s) = chi^2(p || p_s)/s, g(0) = 0 in the limit
  const int panels = steps + (steps & 1);
  const double h = lambda / panels;
  auto g = [&](double s) {
    if (s <= 0.0) return 0.0;
    return chi_square_1d(p, convex_combination(p, q, s), quad_nodes) / s;
  };
  double acc = g(0.0) + g(lambda);
  for (int i = 1; i < panels; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * g(i * h);
  out.rhs = acc * h / 3.0;
  return out;
}

std::pair<double, double> loss_sandwich(const MixtureModel& truth,
                                        const MixtureModel& fit,
                                        const Partition& part) {
  truth.validate();
  fit.validate();
  if (truth.dim() != fit.dim())
    throw std::invalid_argument("loss_sandwich: dimension mismatch");
  const int m = truth.components();
  const auto groups = part.groups(m);
  Eigen::VectorXd group_w = Eigen::VectorXd::Zero(m);
  for (int l = 0; l < m; ++l) {
    for (int i : groups[static_cast<std::size_t>(l)]) group_w[l] += fit.weights[i];
  }
  if ((group_w.array() <= 0).any())
    throw SandwichUnavailable("loss_sandwich: a group carries no weight");

  double lower = 0, quad_term = 0;
  for (int l = 0; l < m; ++l) {
    lower += truth.weights[l] * std::log(truth.weights[l] / group_w[l]);
    for (int i : groups[static_cast<std::size_t>(l)]) {
      quad_term += fit.weights[i] * (truth.weights[l] / group_w[l]) * 0.5 *
                   (fit.means.row(i) - truth.means.row(l)).squaredNorm();
    }
  }
  return {lower, lower + quad_term};
}

}  // namespace gmmlab
