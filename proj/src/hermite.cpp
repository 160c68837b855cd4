#include "gmmlab/hermite.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace gmmlab {

namespace {

constexpr int kMaxOrder = 8;

double binomial(int n, int k) {
  double b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// He_0..He_k at u
void he_table(int k, double u, double* out) {
  out[0] = 1;
  if (k >= 1) out[1] = u;
  for (int j = 1; j < k; ++j) out[j + 1] = u * out[j] - j * out[j - 1];
}

}  // namespace

double he_scalar(int k, double u) {
  if (k < 0 || k > kMaxOrder)
    throw std::invalid_argument("he_scalar: k must be in [0, 8]");
  double table[kMaxOrder + 1];
  he_table(k, u, table);
  return table[k];
}

double he_contract(int k, const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
  if (k < 0 || k > kMaxOrder)
    throw std::invalid_argument("he_contract: k must be in [0, 8]");
  if (x.size() != v.size())
    throw std::invalid_argument("he_contract: dimension mismatch");
  if (k == 0) return 1.0;
  const double vn = v.norm();
  if (vn == 0.0) return 0.0;
  return std::pow(vn, k) * he_scalar(k, x.dot(v) / vn);
}

MomentIdentityCheck moment_identity_check(int k, const Eigen::VectorXd& mu,
                                          const ExpectationEstimator& est) {
  if (k < 1 || k > 4)
    throw std::invalid_argument("moment_identity_check: k must be in [1, 4]");
  const int d = static_cast<int>(mu.size());
  if (d > 6)
    throw std::invalid_argument("moment_identity_check: dense path needs d <= 6");

  MixtureModel gauss(mu.transpose(), Eigen::VectorXd::Ones(1));
  const PointSet ps = est.realize(gauss);

  SymTensor probe(k, d);
  const Eigen::Index entries = probe.size();
  // coordinate multiplicity of each flat entry, e.g. (1,1,2) -> He_2(x1)He_1(x2)
  std::vector<std::array<int, 6>> counts(static_cast<std::size_t>(entries));
  for (Eigen::Index f = 0; f < entries; ++f) {
    std::array<int, 6> c{};
    Eigen::Index rest = f;
    for (int pos = k - 1; pos >= 0; --pos) {
      c[static_cast<std::size_t>(rest % d)]++;
      rest /= d;
    }
    counts[static_cast<std::size_t>(f)] = c;
  }

  struct Acc {
    Eigen::VectorXd s1, s2;
    double w = 0;
  };
  const Acc acc = reduce_batches(
      ps.x.rows(),
      Acc{Eigen::VectorXd::Zero(entries), Eigen::VectorXd::Zero(entries), 0.0},
      [&](Acc& a, std::int64_t lo, std::int64_t hi) {
        Eigen::MatrixXd he(k + 1, d);  // column c holds He_0..He_k at x_c
        for (std::int64_t s = lo; s < hi; ++s) {
          for (int c = 0; c < d; ++c) he_table(k, ps.x(s, c), he.col(c).data());
          const double w = ps.w[s];
          for (Eigen::Index f = 0; f < entries; ++f) {
            double prod = 1;
            const auto& cnt = counts[static_cast<std::size_t>(f)];
            for (int c = 0; c < d; ++c) {
              const int m = cnt[static_cast<std::size_t>(c)];
              if (m > 0) prod *= he(m, c);
            }
            a.s1[f] += w * prod;
            a.s2[f] += w * prod * prod;
          }
          a.w += w;
        }
      },
      [](Acc& a, const Acc& b) {
        a.s1 += b.s1;
        a.s2 += b.s2;
        a.w += b.w;
      });

  MomentIdentityCheck out;
  out.lhs = SymTensor(k, d);
  out.lhs.data() = acc.s1 / acc.w;
  out.rhs = outer_power(mu, k);
  out.stderr_ = SymTensor(k, d);
  if (ps.monte_carlo && ps.mc_count > 1) {
    const Eigen::ArrayXd var =
        (acc.s2 / acc.w - out.lhs.data().array().square().matrix())
            .array()
            .max(0.0);
    out.stderr_.data() = (var / static_cast<double>(ps.mc_count)).sqrt().matrix();
  }
  out.frob_discrepancy = (out.lhs.data() - out.rhs.data()).norm();
  out.frob_stderr = out.stderr_.data().norm();
  return out;
}

OrthogonalityCheck orthogonality_check(int j, int k, const Eigen::VectorXd& s,
                                       const Eigen::VectorXd& t,
                                       const ExpectationEstimator& est) {
  if (j < 0 || j > 4 || k < 0 || k > 4)
    throw std::invalid_argument("orthogonality_check: orders must be in [0, 4]");
  if (s.size() != t.size())
    throw std::invalid_argument("orthogonality_check: dimension mismatch");
  const int d = static_cast<int>(s.size());
  MixtureModel gauss(Eigen::MatrixXd::Zero(1, d), Eigen::VectorXd::Ones(1));
  const PointSet ps = est.realize(gauss);

  struct Acc {
    double s1 = 0, s2 = 0, w = 0;
  };
  const Acc acc = reduce_batches(
      ps.x.rows(), Acc{},
      [&](Acc& a, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
          const Eigen::VectorXd x = ps.x.row(i).transpose();
          const double f = he_contract(j, x, s) * he_contract(k, x, t);
          const double w = ps.w[i];
          a.s1 += w * f;
          a.s2 += w * f * f;
          a.w += w;
        }
      },
      [](Acc& a, const Acc& b) {
        a.s1 += b.s1;
        a.s2 += b.s2;
        a.w += b.w;
      });

  OrthogonalityCheck out;
  out.estimate = acc.s1 / acc.w;
  out.target = (j == k) ? factorial(k) * std::pow(s.dot(t), k) : 0.0;
  if (ps.monte_carlo && ps.mc_count > 1) {
    const double var =
        std::max(0.0, acc.s2 / acc.w - out.estimate * out.estimate);
    out.stderr_ = std::sqrt(var / static_cast<double>(ps.mc_count));
  }
  return out;
}

double translation_second_moment(int k, const Eigen::VectorXd& mu,
                                 const Eigen::VectorXd& v) {
  if (k < 0 || k > 4)
    throw std::invalid_argument("translation_second_moment: k must be in [0, 4]");
  if (mu.size() != v.size())
    throw std::invalid_argument("translation_second_moment: dimension mismatch");
  const double mv = mu.dot(v);
  const double vv = v.squaredNorm();
  double total = 0;
  for (int j = 0; j <= k; ++j) {
    const double b = binomial(k, j);
    // 0^0 = 1 so the mu = 0, j = k term survives
    total += factorial(j) * b * b * std::pow(mv, 2 * (k - j)) * std::pow(vv, j);
  }
  return total;
}

}  // namespace gmmlab
