#include "gmmlab/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "gmmlab/rng.hpp"

namespace gmmlab {

namespace {

// iterate all multi-indices of length k over [0, d)
template <class F>
void for_each_index(int k, int d, F&& f) {
  std::array<int, 4> idx{0, 0, 0, 0};
  while (true) {
    f(idx);
    int pos = k - 1;
    while (pos >= 0) {
      if (++idx[static_cast<std::size_t>(pos)] < d) break;
      idx[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) return;
  }
}

}  // namespace

SymTensor::SymTensor(int order, int dim) : order_(order), dim_(dim) {
  if (order < 1 || order > 4)
    throw std::invalid_argument("SymTensor: order must be in [1, 4]");
  if (dim < 1) throw std::invalid_argument("SymTensor: dim must be >= 1");
  Eigen::Index n = 1;
  for (int i = 0; i < order; ++i) n *= dim;
  data_ = Eigen::VectorXd::Zero(n);
}

Eigen::Index SymTensor::flat(const std::array<int, 4>& idx) const {
  Eigen::Index f = 0;
  for (int i = 0; i < order_; ++i) {
    f = f * dim_ + idx[static_cast<std::size_t>(i)];
  }
  return f;
}

SymTensor& SymTensor::operator+=(const SymTensor& other) {
  if (order_ != other.order_ || dim_ != other.dim_)
    throw std::invalid_argument("SymTensor: order/dim mismatch");
  data_ += other.data_;
  return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& other) {
  if (order_ != other.order_ || dim_ != other.dim_)
    throw std::invalid_argument("SymTensor: order/dim mismatch");
  data_ -= other.data_;
  return *this;
}

SymTensor& SymTensor::operator*=(double c) {
  data_ *= c;
  return *this;
}

double SymTensor::max_asymmetry() const {
  double worst = 0;
  for_each_index(order_, dim_, [&](std::array<int, 4> idx) {
    std::array<int, 4> sorted = idx;
    std::sort(sorted.begin(), sorted.begin() + order_);
    worst = std::max(worst, std::abs(at(idx) - at(sorted)));
  });
  return worst;
}

SymTensor outer_power(const Eigen::VectorXd& v, int k) {
  SymTensor t(k, static_cast<int>(v.size()));
  for_each_index(k, t.dim(), [&](const std::array<int, 4>& idx) {
    double prod = 1;
    for (int i = 0; i < k; ++i) prod *= v[idx[static_cast<std::size_t>(i)]];
    t.at(idx) = prod;
  });
  return t;
}

double inner(const SymTensor& a, const SymTensor& b) {
  if (a.order() != b.order() || a.dim() != b.dim())
    throw std::invalid_argument("inner: order/dim mismatch");
  return a.data().dot(b.data());
}

double frob(const SymTensor& t) { return t.data().norm(); }

double contract_full(const SymTensor& t, const Eigen::VectorXd& v) {
  if (v.size() != t.dim()) throw std::invalid_argument("contract_full: dim mismatch");
  // fold one mode at a time: cost O(d^k)
  Eigen::VectorXd cur = t.data();
  for (int mode = 0; mode < t.order(); ++mode) {
    const Eigen::Index rows = cur.size() / t.dim();
    Eigen::Map<const Eigen::MatrixXd> m(cur.data(), t.dim(), rows);
    cur = (v.transpose() * m).transpose();
  }
  return cur[0];
}

Eigen::VectorXd contract_all_but_one(const SymTensor& t,
                                     const Eigen::VectorXd& v) {
  if (v.size() != t.dim())
    throw std::invalid_argument("contract_all_but_one: dim mismatch");
  Eigen::VectorXd cur = t.data();
  for (int mode = 0; mode < t.order() - 1; ++mode) {
    const Eigen::Index rows = cur.size() / t.dim();
    Eigen::Map<const Eigen::MatrixXd> m(cur.data(), t.dim(), rows);
    cur = (v.transpose() * m).transpose();
  }
  return cur;
}

double spectral_norm(const SymTensor& t, int restarts, int iters) {
  const int d = t.dim();
  const int k = t.order();
  const CounterRng rng(0x5e31, 0x7e);
  double best = 0;
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd v(d);
    for (int c = 0; c < d; ++c) {
      double z0, z1;
      rng.normal_pair(static_cast<std::uint64_t>(r) * 2 * d + 2 * c, z0, z1);
      v[c] = z0;
    }
    if (v.norm() == 0) continue;
    v.normalize();
    double f = contract_full(t, v);
    double sign = f >= 0 ? 1.0 : -1.0;
    for (int it = 0; it < iters; ++it) {
      Eigen::VectorXd g = sign * k * contract_all_but_one(t, v);
      g -= g.dot(v) * v;  // tangent projection
      const double gn = g.norm();
      if (gn < 1e-14) break;
      g /= gn;
      double step = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        Eigen::VectorXd cand = (v + step * g).normalized();
        const double fc = contract_full(t, cand);
        if (sign * fc > sign * f + 1e-4 * step * gn) {
          v = cand;
          f = fc;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      sign = f >= 0 ? 1.0 : -1.0;
    }
    best = std::max(best, std::abs(f));
  }
  return best;
}

SymTensor moment_tensor(const MixtureModel& model, int k) {
  if (k < 2 || k > 4)
    throw std::invalid_argument("moment_tensor: k must be in {2, 3, 4}");
  model.validate();
  SymTensor t(k, model.dim());
  for (int i = 0; i < model.components(); ++i) {
    SymTensor part = outer_power(model.means.row(i).transpose(), k);
    part *= model.weights[i];
    t += part;
  }
  return t;
}

}  // namespace gmmlab
