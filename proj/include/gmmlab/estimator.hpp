#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gmmlab/model.hpp"

namespace gmmlab {

// A population expectation E_{x~dist}[f(x)] realized as a weighted point set:
// Monte Carlo draws with uniform weights, or composite Gauss-Legendre nodes
// weighted by the density (d = 1 only).
struct PointSet {
  Eigen::MatrixXd x;          // S x d
  Eigen::VectorXd w;          // S, sums to ~1
  bool monte_carlo = false;
  std::int64_t mc_count = 0;  // sample count when monte_carlo
};

class ExpectationEstimator {
 public:
  enum class Mode { MonteCarlo, Quadrature1d };

  static ExpectationEstimator monte_carlo(std::uint64_t seed,
                                          std::int64_t count);
  static ExpectationEstimator quadrature_1d(double grid_lo, double grid_hi,
                                            int nodes);

  Mode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t count() const { return count_; }
  double grid_lo() const { return lo_; }
  double grid_hi() const { return hi_; }
  int nodes() const { return nodes_; }

  // same mode and budget on a decorrelated stream (MC only; quadrature is
  // deterministic and returns itself)
  ExpectationEstimator substream(std::uint64_t tag) const;

  // draws from / integrates against dist; quadrature requires dist.dim() == 1
  PointSet realize(const MixtureModel& dist) const;

  // true when the quadrature grid covers every row of means +- margin
  bool grid_covers(const Eigen::MatrixXd& means, double margin) const;

 private:
  ExpectationEstimator() = default;
  Mode mode_ = Mode::MonteCarlo;
  std::uint64_t seed_ = 0;
  std::int64_t count_ = 0;
  double lo_ = 0, hi_ = 0;
  int nodes_ = 0;
};

// quadrature covering all means of the given models +- 12 standard deviations
ExpectationEstimator make_quadrature(const std::vector<const MixtureModel*>& models,
                                     int nodes = 2048);

// Gauss-Legendre nodes/weights on [-1, 1]
void gauss_legendre(int order, std::vector<double>& nodes,
                    std::vector<double>& weights);

// plain composite Gauss-Legendre integral of f over [lo, hi]
// (16-point panels; total node budget rounded up to a whole panel count)
template <class F>
double integrate_1d(double lo, double hi, int nodes, F&& f) {
  std::vector<double> gx, gw;
  gauss_legendre(16, gx, gw);
  const int panels = std::max(1, (nodes + 15) / 16);
  const double h = (hi - lo) / panels;
  double total = 0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * h;
    double part = 0;
    for (std::size_t q = 0; q < gx.size(); ++q) {
      const double x = a + 0.5 * h * (gx[q] + 1.0);
      part += gw[q] * f(x);
    }
    total += 0.5 * h * part;
  }
  return total;
}

}  // namespace gmmlab
