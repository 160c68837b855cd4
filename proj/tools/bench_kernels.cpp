// Times the batched expectation kernels in serial and OpenMP mode on a
// representative instance and checks that both paths agree bit for bit.

#include <chrono>
#include <cstdio>
#include <functional>

#include "gmmlab/divergence.hpp"
#include "gmmlab/gradients.hpp"
#include "gmmlab/model.hpp"
#include "gmmlab/parallel.hpp"
#include "gmmlab/rng.hpp"
#include "gmmlab/trainer.hpp"

using namespace gmmlab;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(
             clock::now().time_since_epoch())
      .count();
}

struct Result {
  double ms = 0;
  Eigen::VectorXd value;
};

Result timed(const std::function<Eigen::VectorXd()>& f, int reps) {
  Result r;
  r.value = f();  // warm up and keep the value
  const double t0 = now_ms();
  for (int i = 0; i < reps; ++i) f();
  r.ms = (now_ms() - t0) / reps;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const std::int64_t samples = argc > 1 ? std::atoll(argv[1]) : 200000;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;

  // figure-1 scale instance: 5 clusters in d = 8, fit with 15 components
  const int d = 8, m = 5, n = 15;
  const CounterRng rng(11, 0);
  Eigen::MatrixXd tmeans(m, d);
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < d; c += 2) {
      double z0, z1;
      rng.normal_pair(static_cast<std::uint64_t>(i * d + c), z0, z1);
      tmeans(i, c) = 12.0 * z0;
      if (c + 1 < d) tmeans(i, c + 1) = 12.0 * z1;
    }
  }
  const MixtureModel truth(tmeans, Eigen::VectorXd::Constant(m, 1.0 / m));
  const MixtureModel fit = init_random(truth, n, 3);
  const auto est = ExpectationEstimator::monte_carlo(5, samples);
  const PointSet ps = est.realize(truth);
  const Eigen::VectorXd logpstar = log_density_batch(truth, ps.x);

  struct Kernel {
    const char* name;
    std::function<Eigen::VectorXd(Exec)> run;
  };
  const Kernel kernels[] = {
      {"log_density",
       [&](Exec e) { return Eigen::VectorXd(log_density_batch(fit, ps.x, e)); }},
      {"posterior_mass",
       [&](Exec e) { return Eigen::VectorXd(posterior_mass_on(ps, fit, e)); }},
      {"grad_means",
       [&](Exec e) {
         const Eigen::MatrixXd g = grad_means_on(ps, fit, e);
         return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(g.data(), g.size()));
       }},
      {"kl_loss",
       [&](Exec e) {
         const LossEstimate l = kl_loss_on(ps, logpstar, fit, e);
         Eigen::VectorXd v(2);
         v << l.value, l.stderr_;
         return v;
       }},
  };

  std::printf("samples=%lld  reps=%d  threads=%d\n",
              static_cast<long long>(samples), reps, max_threads());
  std::printf("%-16s %12s %12s %9s %12s\n", "kernel", "serial ms", "openmp ms",
              "speedup", "max|diff|");
  for (const Kernel& k : kernels) {
    const Result serial = timed([&] { return k.run(Exec::Serial); }, reps);
    const Result par = timed([&] { return k.run(Exec::OpenMp); }, reps);
    const double diff = (serial.value - par.value).cwiseAbs().maxCoeff();
    std::printf("%-16s %12.3f %12.3f %8.2fx %12.3g\n", k.name, serial.ms,
                par.ms, serial.ms / par.ms, diff);
    if (diff != 0.0) {
      std::printf("FAIL: %s parallel result differs from serial\n", k.name);
      return 1;
    }
  }
  return 0;
}
