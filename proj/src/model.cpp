#include "gmmlab/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gmmlab/rng.hpp"

namespace gmmlab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// per-point counter stride in the sampling stream: one uniform for the
// component choice plus an even number of normals
std::int64_t sample_stride(int d) { return 1 + d + (d & 1); }

}  // namespace

MixtureModel::MixtureModel(Eigen::MatrixXd means_in, Eigen::VectorXd weights_in)
    : means(std::move(means_in)), weights(std::move(weights_in)) {
  validate();
}

void MixtureModel::validate() const {
  if (means.rows() != weights.size())
    throw std::invalid_argument("mixture: means/weights size mismatch");
  if (means.rows() == 0) throw std::invalid_argument("mixture: no components");
  if (means.cols() == 0) throw std::invalid_argument("mixture: dim must be positive");
  if ((weights.array() < 0).any())
    throw std::invalid_argument("mixture: negative weight");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("mixture: weights must sum to 1");
}

MixtureModel MixtureModel::translated(const Eigen::VectorXd& offset) const {
  if (offset.size() != dim())
    throw std::invalid_argument("translated: offset dimension mismatch");
  MixtureModel out = *this;
  out.means.rowwise() += offset.transpose();
  return out;
}

std::vector<std::vector<int>> Partition::groups(int truth_components) const {
  std::vector<std::vector<int>> g(static_cast<std::size_t>(truth_components));
  for (int i = 0; i < static_cast<int>(assign.size()); ++i) {
    g[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])].push_back(i);
  }
  return g;
}

namespace detail {

// Shifted exponents below this are flushed to exactly 0: e^-350 ~ 1e-152 is
// invisible next to the leading term at double precision, and the exact zero
// keeps later products and squares out of the (slow) subnormal range.
constexpr double kExpFloor = -350.0;

void exp_shifted(Eigen::MatrixXd& t) {
  double* p = t.data();
  const Eigen::Index n = t.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    p[i] = p[i] < kExpFloor ? 0.0 : std::exp(p[i]);
  }
}

// log pi_i - |x - mu_i|^2 / 2 for a block of points; -inf rows for zero
// weights. The -d/2 log(2pi) constant is added by the callers.
Eigen::MatrixXd component_exponents(const MixtureModel& model,
                                    const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const Eigen::VectorXd mu_sq = model.means.rowwise().squaredNorm();
  const Eigen::VectorXd x_sq = X.rowwise().squaredNorm();
  Eigen::VectorXd logw(model.components());
  for (int i = 0; i < model.components(); ++i) {
    logw[i] = model.weights[i] > 0 ? std::log(model.weights[i])
                                   : -std::numeric_limits<double>::infinity();
  }
  Eigen::MatrixXd T = X * model.means.transpose();  // B x n
  T.rowwise() += (logw - 0.5 * mu_sq).transpose();
  T.colwise() -= 0.5 * x_sq;
  return T;
}

void logdensity_block(const MixtureModel& model,
                      const Eigen::Ref<const Eigen::MatrixXd>& X,
                      Eigen::Ref<Eigen::VectorXd> out) {
  Eigen::MatrixXd T = component_exponents(model, X);
  const double c = -0.5 * model.dim() * kLog2Pi;
  const Eigen::VectorXd a = T.rowwise().maxCoeff();
  T.colwise() -= a;
  exp_shifted(T);
  out = a.array() + T.rowwise().sum().array().log() + c;
}

// returns psi rows; also fills logp (including the Gaussian constant)
void posterior_block(const MixtureModel& model,
                     const Eigen::Ref<const Eigen::MatrixXd>& X,
                     Eigen::Ref<Eigen::MatrixXd> psi,
                     Eigen::Ref<Eigen::VectorXd> logp) {
  Eigen::MatrixXd T = component_exponents(model, X);
  const double c = -0.5 * model.dim() * kLog2Pi;
  const Eigen::VectorXd a = T.rowwise().maxCoeff();
  T.colwise() -= a;
  exp_shifted(T);
  const Eigen::VectorXd s = T.rowwise().sum();
  psi = T.array().colwise() / s.array();
  logp = a.array() + s.array().log() + c;
}

}  // namespace detail

double log_density(const MixtureModel& model, const Eigen::VectorXd& x) {
  model.validate();
  if (x.size() != model.dim())
    throw std::invalid_argument("log_density: point dimension mismatch");
  if (model.weights.maxCoeff() <= 0)
    throw std::invalid_argument("log_density: all weights are zero");
  Eigen::VectorXd out(1);
  detail::logdensity_block(model, x.transpose(), out);
  return out[0];
}

Eigen::VectorXd log_density_batch(const MixtureModel& model,
                                  const Eigen::MatrixXd& X, Exec exec) {
  if (X.cols() != model.dim())
    throw std::invalid_argument("log_density_batch: dimension mismatch");
  Eigen::VectorXd out(X.rows());
  for_batches(
      X.rows(),
      [&](std::int64_t lo, std::int64_t hi) {
        detail::logdensity_block(model, X.middleRows(lo, hi - lo),
                                 out.segment(lo, hi - lo));
      },
      exec);
  return out;
}

Eigen::VectorXd posterior(const MixtureModel& model, const Eigen::VectorXd& x) {
  model.validate();
  if (x.size() != model.dim())
    throw std::invalid_argument("posterior: point dimension mismatch");
  if (model.weights.maxCoeff() <= 0)
    throw std::invalid_argument("posterior: all weights are zero");
  Eigen::MatrixXd psi(1, model.components());
  Eigen::VectorXd logp(1);
  detail::posterior_block(model, x.transpose(), psi, logp);
  return psi.row(0);
}

Eigen::MatrixXd posterior_batch(const MixtureModel& model,
                                const Eigen::MatrixXd& X, Exec exec) {
  if (X.cols() != model.dim())
    throw std::invalid_argument("posterior_batch: dimension mismatch");
  Eigen::MatrixXd psi(X.rows(), model.components());
  Eigen::VectorXd logp(X.rows());
  for_batches(
      X.rows(),
      [&](std::int64_t lo, std::int64_t hi) {
        detail::posterior_block(model, X.middleRows(lo, hi - lo),
                                psi.middleRows(lo, hi - lo),
                                logp.segment(lo, hi - lo));
      },
      exec);
  return psi;
}

Eigen::MatrixXd sample(const MixtureModel& model, std::uint64_t seed,
                       std::int64_t count, Exec exec) {
  model.validate();
  if (count < 0) throw std::invalid_argument("sample: negative count");
  const int d = model.dim();
  const int n = model.components();
  Eigen::MatrixXd X(count, d);
  if (count == 0) return X;
  const CounterRng rng(seed, /*stream=*/0x5a3);
  const std::int64_t stride = sample_stride(d);
  for_batches(
      count,
      [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t s = lo; s < hi; ++s) {
          const std::uint64_t base = static_cast<std::uint64_t>(s * stride);
          const double u = rng.uniform(base);
          int comp = n - 1;
          double acc = 0;
          for (int i = 0; i < n; ++i) {
            acc += model.weights[i];
            if (u <= acc) {
              comp = i;
              break;
            }
          }
          double z0 = 0, z1 = 0;
          for (int j = 0; j < d; j += 2) {
            rng.normal_pair(base + 1 + static_cast<std::uint64_t>(j), z0, z1);
            X(s, j) = model.means(comp, j) + z0;
            if (j + 1 < d) X(s, j + 1) = model.means(comp, j + 1) + z1;
          }
        }
      },
      exec);
  return X;
}

Partition partition(const MixtureModel& fit, const MixtureModel& truth) {
  if (fit.dim() != truth.dim())
    throw std::invalid_argument("partition: dimension mismatch");
  Partition part;
  part.assign.resize(static_cast<std::size_t>(fit.components()));
  for (int i = 0; i < fit.components(); ++i) {
    int best = 0;
    double best_d = (fit.means.row(i) - truth.means.row(0)).squaredNorm();
    for (int l = 1; l < truth.components(); ++l) {
      const double dist = (fit.means.row(i) - truth.means.row(l)).squaredNorm();
      if (dist < best_d) {  // strict: ties keep the lowest index
        best_d = dist;
        best = l;
      }
    }
    part.assign[static_cast<std::size_t>(i)] = best;
  }
  return part;
}

double potential_U(const MixtureModel& fit, const MixtureModel& truth,
                   const Partition& part) {
  if (fit.dim() != truth.dim())
    throw std::invalid_argument("potential_U: dimension mismatch");
  if (static_cast<int>(part.assign.size()) != fit.components())
    throw std::invalid_argument("potential_U: partition size mismatch");
  double u = 0;
  for (int i = 0; i < fit.components(); ++i) {
    u += (fit.means.row(i) -
          truth.means.row(part.assign[static_cast<std::size_t>(i)]))
             .squaredNorm();
  }
  return u;
}

AssumptionReport check_assumptions(const MixtureModel& truth, int n) {
  truth.validate();
  if (n < 1) throw std::invalid_argument("check_assumptions: n must be >= 1");
  const int m = truth.components();
  const int d = truth.dim();
  AssumptionReport rep;

  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < m; ++i) {
    m2.noalias() +=
        truth.weights[i] * truth.means.row(i).transpose() * truth.means.row(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m2);
  Eigen::VectorXd evals = eig.eigenvalues().reverse();  // descending
  rep.lambda_max = evals[0];
  rep.lambda_min = m <= d ? evals[m - 1] : 0.0;
  int rank = 0;
  for (int i = 0; i < d; ++i) {
    if (evals[i] > 1e-10 * std::max(rep.lambda_max, 0.0)) ++rank;
  }
  rep.rank_ok = (m <= d) && (rank >= m);

  rep.d_min = truth.means.rowwise().norm().minCoeff();
  rep.d_max = truth.means.rowwise().norm().maxCoeff();
  rep.pi_min_star = truth.weights.minCoeff();

  rep.delta = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      rep.delta = std::min(
          rep.delta, (truth.means.row(i) - truth.means.row(j)).norm());
    }
  }
  if (m < 2) rep.delta = 0;

  const double dn = std::sqrt(static_cast<double>(d) * n);
  rep.bounded_ok = rep.lambda_min > 0 &&
                   rep.d_min >= 4.0 * (rep.lambda_max / rep.lambda_min) * dn;

  if (rep.pi_min_star > 0 && rep.lambda_min > 0) {
    const double log_arg = static_cast<double>(d) * n * m * rep.d_max /
                           (rep.pi_min_star * rep.lambda_min);
    rep.sep_term_log = std::sqrt(std::max(0.0, std::log(log_arg)));
  } else {
    rep.sep_term_log = std::numeric_limits<double>::infinity();
  }
  rep.sep_term_bound = std::sqrt(rep.d_max * dn);
  rep.sep_term_dim =
      rep.pi_min_star > 0
          ? std::sqrt(static_cast<double>(d) / rep.pi_min_star)
          : std::numeric_limits<double>::infinity();
  const double sep_needed =
      std::max({rep.sep_term_log, rep.sep_term_bound, rep.sep_term_dim});
  rep.separated_ok = m >= 2 && rep.delta >= sep_needed;
  return rep;
}

std::pair<MixtureModel, Eigen::VectorXd> recenter(const MixtureModel& truth) {
  truth.validate();
  const int m = truth.components();
  if (m < 2) throw std::invalid_argument("recenter: need at least 2 components");
  int bi = 0, bj = 1;
  double best = (truth.means.row(0) - truth.means.row(1)).norm();
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double dist = (truth.means.row(i) - truth.means.row(j)).norm();
      if (dist < best) {
        best = dist;
        bi = i;
        bj = j;
      }
    }
  }
  Eigen::VectorXd offset =
      0.5 * (truth.means.row(bi) + truth.means.row(bj)).transpose();
  MixtureModel shifted = truth.translated(-offset);
  return {std::move(shifted), std::move(offset)};
}

}  // namespace gmmlab
