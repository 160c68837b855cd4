#include "gmmlab/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "gmmlab/rng.hpp"

namespace gmmlab {

ExpectationEstimator ExpectationEstimator::monte_carlo(std::uint64_t seed,
                                                       std::int64_t count) {
  if (count < 1) throw std::invalid_argument("monte_carlo: count must be >= 1");
  ExpectationEstimator est;
  est.mode_ = Mode::MonteCarlo;
  est.seed_ = seed;
  est.count_ = count;
  return est;
}

ExpectationEstimator ExpectationEstimator::quadrature_1d(double grid_lo,
                                                         double grid_hi,
                                                         int nodes) {
  if (nodes < 16) throw std::invalid_argument("quadrature_1d: nodes must be >= 16");
  if (!(grid_lo < grid_hi))
    throw std::invalid_argument("quadrature_1d: grid_lo must be < grid_hi");
  ExpectationEstimator est;
  est.mode_ = Mode::Quadrature1d;
  est.lo_ = grid_lo;
  est.hi_ = grid_hi;
  est.nodes_ = nodes;
  return est;
}

ExpectationEstimator ExpectationEstimator::substream(std::uint64_t tag) const {
  if (mode_ == Mode::Quadrature1d) return *this;
  ExpectationEstimator est = *this;
  est.seed_ = mix64(seed_ ^ mix64(tag + 0x7fb5d329728ea185ULL));
  return est;
}

PointSet ExpectationEstimator::realize(const MixtureModel& dist) const {
  PointSet ps;
  if (mode_ == Mode::MonteCarlo) {
    ps.monte_carlo = true;
    ps.mc_count = count_;
    ps.x = sample(dist, seed_, count_);
    ps.w = Eigen::VectorXd::Constant(count_, 1.0 / static_cast<double>(count_));
    return ps;
  }
  if (dist.dim() != 1)
    throw std::invalid_argument("quadrature estimator requires d = 1");
  std::vector<double> gx, gw;
  gauss_legendre(16, gx, gw);
  const int panels = std::max(1, (nodes_ + 15) / 16);
  const int total = panels * 16;
  const double h = (hi_ - lo_) / panels;
  ps.monte_carlo = false;
  ps.mc_count = 0;
  ps.x.resize(total, 1);
  ps.w.resize(total);
  for (int p = 0; p < panels; ++p) {
    const double a = lo_ + p * h;
    for (int q = 0; q < 16; ++q) {
      const int idx = p * 16 + q;
      ps.x(idx, 0) = a + 0.5 * h * (gx[static_cast<std::size_t>(q)] + 1.0);
      ps.w[idx] = 0.5 * h * gw[static_cast<std::size_t>(q)];
    }
  }
  const Eigen::VectorXd logp = log_density_batch(dist, ps.x);
  // exact zero for negligible tail mass keeps later products normal-range
  ps.w = (logp.array() < -350.0)
             .select(0.0, ps.w.array() * logp.array().exp());
  return ps;
}

bool ExpectationEstimator::grid_covers(const Eigen::MatrixXd& means,
                                       double margin) const {
  if (mode_ != Mode::Quadrature1d) return true;
  const double lo_need = means.minCoeff() - margin;
  const double hi_need = means.maxCoeff() + margin;
  return lo_ <= lo_need + 1e-9 && hi_ >= hi_need - 1e-9;
}

ExpectationEstimator make_quadrature(
    const std::vector<const MixtureModel*>& models, int nodes) {
  if (models.empty()) throw std::invalid_argument("make_quadrature: no models");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const MixtureModel* m : models) {
    if (m->dim() != 1)
      throw std::invalid_argument("make_quadrature: models must be 1-D");
    lo = std::min(lo, m->means.minCoeff());
    hi = std::max(hi, m->means.maxCoeff());
  }
  return ExpectationEstimator::quadrature_1d(lo - 12.0, hi + 12.0, nodes);
}

void gauss_legendre(int order, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  nodes.assign(static_cast<std::size_t>(order), 0.0);
  weights.assign(static_cast<std::size_t>(order), 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_order from the Chebyshev-like initial guess
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(order - 1 - i)] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(order - 1 - i)] = w;
  }
}

}  // namespace gmmlab
