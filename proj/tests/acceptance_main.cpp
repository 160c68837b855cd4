// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line each. Usage: acceptance [ids...]; default runs all.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gmmlab/divergence.hpp"
#include "gmmlab/gradients.hpp"
#include "gmmlab/harness.hpp"
#include "gmmlab/hermite.hpp"
#include "gmmlab/identifiability.hpp"
#include "gmmlab/trainer.hpp"
#include "gmmlab/weight_solver.hpp"

using namespace gmmlab;

namespace {

std::mt19937_64 rng_for(int criterion) {
  return std::mt19937_64(0xACCE97ULL * 1000003ULL + criterion);
}

MixtureModel random_model_g(std::mt19937_64& gen, int n, int d, double scale,
                            double weight_floor = 0.02) {
  std::normal_distribution<double> normal(0.0, scale);
  std::exponential_distribution<double> expo(1.0);
  Eigen::MatrixXd means(n, d);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) means(i, c) = normal(gen);
  }
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = expo(gen) + weight_floor;
  w /= w.sum();
  return MixtureModel(std::move(means), std::move(w));
}

// truth with full-rank second moment for whitening-based criteria
MixtureModel random_valid_truth(std::mt19937_64& gen, int m, int d,
                                double scale) {
  while (true) {
    MixtureModel cand = random_model_g(gen, m, d, scale);
    bool ok = true;
    for (int i = 0; i < m; ++i) ok &= cand.means.row(i).norm() > 0.8;
    if (!ok) continue;
    const AssumptionReport rep = check_assumptions(cand, m);
    if (rep.rank_ok && rep.lambda_min > 1e-4) return cand;
  }
}

struct CellResult {
  Trajectory traj;
  int n = 0;
  std::uint64_t seed = 0;
};

// shared state: criterion 8 runs the experiments, 9 and 10 reuse them
struct Fig1State {
  bool ran = false;
  MixtureModel truth;
  AssumptionReport report;
  std::vector<CellResult> n15;
  std::vector<CellResult> n5;
};
Fig1State g_fig1;

void ensure_fig1() {
  if (g_fig1.ran) return;
  ExperimentConfig cfg;  // spec defaults: m=5, d=8, delta=12, T=5000, ...
  cfg.fit_sizes = {5, 15};
  g_fig1.truth = build_truth(cfg);
  g_fig1.report = check_assumptions(g_fig1.truth, 15);
  for (int n : cfg.fit_sizes) {
    for (std::uint64_t seed : cfg.seeds) {
      CellResult cell;
      cell.n = n;
      cell.seed = seed;
      cell.traj = run_cell(g_fig1.truth, cfg, n, seed);
      (n == 15 ? g_fig1.n15 : g_fig1.n5).push_back(std::move(cell));
    }
  }
  g_fig1.ran = true;
}

bool criterion1(std::string& detail) {
  std::mt19937_64 gen = rng_for(1);
  std::uniform_int_distribution<int> dims(1, 5);
  std::uniform_int_distribution<int> comps(1, 4);
  const double h = 1e-4;
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int d = dims(gen);
    const MixtureModel truth = random_model_g(gen, comps(gen), d, 2.0);
    const MixtureModel fit = random_model_g(gen, comps(gen), d, 2.0);
    const auto est = ExpectationEstimator::monte_carlo(40000 + rep, 4000);
    const FdGradient fd = fd_gradient(truth, fit, est, h);
    const Eigen::MatrixXd an = grad_means_direct(truth, fit, est);
    const double rel =
        (fd.grad_means - an).norm() / std::max(1e-12, an.norm());
    worst = std::max(worst, rel);
  }
  std::ostringstream ss;
  ss << "max relative error " << worst << " (tol 1e-5, 100 instances)";
  detail = ss.str();
  return worst <= 1e-5;
}

bool criterion2(std::string& detail) {
  std::mt19937_64 gen = rng_for(2);
  std::uniform_int_distribution<int> comps(1, 4);
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const MixtureModel truth = random_model_g(gen, comps(gen), 1, 2.5);
    const MixtureModel fit = random_model_g(gen, comps(gen), 1, 2.5);
    const auto quad = make_quadrature({&truth, &fit});
    const Eigen::MatrixXd direct = grad_means_direct(truth, fit, quad);
    const Eigen::MatrixXd stein = grad_means_stein(truth, fit, quad);
    worst = std::max(worst, (direct - stein).cwiseAbs().maxCoeff());
  }
  std::ostringstream ss;
  ss << "max |direct - stein| " << worst << " (tol 1e-7, 100 instances)";
  detail = ss.str();
  return worst <= 1e-7;
}

bool criterion3(std::string& detail) {
  std::mt19937_64 gen = rng_for(3);
  std::normal_distribution<double> dir(0.0, 0.6);
  const std::int64_t mc = 1000000;
  int checks = 0, failures = 0;

  // Hermite moment identity, k = 1..4
  for (int k = 1; k <= 4; ++k) {
    Eigen::VectorXd mu(3);
    for (int c = 0; c < 3; ++c) mu[c] = dir(gen);
    const auto est = ExpectationEstimator::monte_carlo(7000 + k, mc);
    const MomentIdentityCheck c = moment_identity_check(k, mu, est);
    ++checks;
    failures += !(c.frob_discrepancy <= 3.0 * c.frob_stderr);
  }

  // orthogonality across the (j, k) <= 4 grid, two sweeps
  for (int idx = 0; idx < 50; ++idx) {
    const int j = (idx % 25) / 5;
    const int k = idx % 5;
    Eigen::VectorXd s(3), t(3);
    for (int c = 0; c < 3; ++c) {
      s[c] = dir(gen);
      t[c] = dir(gen);
    }
    const auto est =
        ExpectationEstimator::monte_carlo(8000 + idx, mc);
    const OrthogonalityCheck c = orthogonality_check(j, k, s, t, est);
    ++checks;
    failures +=
        !(std::abs(c.estimate - c.target) <= std::max(3.0 * c.stderr_, 1e-12));
  }

  // translation second moment, k = 0..4
  for (int k = 0; k <= 4; ++k) {
    Eigen::VectorXd mu(3), v(3);
    for (int c = 0; c < 3; ++c) {
      mu[c] = dir(gen);
      v[c] = dir(gen);
    }
    const double target = translation_second_moment(k, mu, v);
    const MixtureModel gauss(mu.transpose(), Eigen::VectorXd::Ones(1));
    const PointSet ps =
        ExpectationEstimator::monte_carlo(9000 + k, mc).realize(gauss);
    double s1 = 0, s2 = 0;
    for (Eigen::Index i = 0; i < ps.x.rows(); ++i) {
      const double f = he_contract(k, ps.x.row(i).transpose(), v);
      s1 += ps.w[i] * f * f;
      s2 += ps.w[i] * f * f * f * f;
    }
    const double se = std::sqrt(std::max(0.0, s2 - s1 * s1) /
                                static_cast<double>(ps.mc_count));
    ++checks;
    // k = 0 is deterministic (variance 0); the floor covers the summation
    // rounding of ~1e6 terms
    failures += !(std::abs(s1 - target) <= std::max(3.0 * se, 1e-9));
  }

  std::ostringstream ss;
  ss << failures << "/" << checks
     << " identity checks outside 3 stderr (MC 1e6)";
  detail = ss.str();
  return failures == 0;
}

bool criterion4(std::string& detail) {
  std::mt19937_64 gen = rng_for(4);
  std::uniform_int_distribution<int> md(2, 5);
  double worst_cond = 0, worst_orth = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int m = md(gen);
    std::uniform_int_distribution<int> dd(m, 10);
    const int d = dd(gen);
    const MixtureModel truth = random_valid_truth(gen, m, d, 4.0);
    const WhiteningResult wr = whitening(truth);

    Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < m; ++i) {
      m2 += truth.weights[i] * truth.means.row(i).transpose() *
            truth.means.row(i);
    }
    Eigen::MatrixXd target = Eigen::MatrixXd::Zero(d, d);
    target.topLeftCorner(m, m).setIdentity();
    worst_cond = std::max(worst_cond,
                          (wr.w.transpose() * m2 * wr.w - target).norm());
    const Eigen::MatrixXd wm = whitened_truth_means(truth, wr);
    worst_orth = std::max(
        worst_orth, (wm * wm.transpose() - Eigen::MatrixXd::Identity(m, m))
                        .cwiseAbs()
                        .maxCoeff());
  }
  std::ostringstream ss;
  ss << "max whitening residual " << worst_cond << ", max orthonormality gap "
     << worst_orth << " (tol 1e-8, 100 instances)";
  detail = ss.str();
  return worst_cond <= 1e-8 && worst_orth <= 1e-8;
}

bool criterion5(std::string& detail) {
  // Pairs share their rough shape: q jitters p's means and redraws weights.
  // For strongly separated pairs chi^2(p || p_s)/s develops a boundary layer
  // of width ~ 1/chi^2(p||q) at s -> 1 that no fixed Simpson grid resolves,
  // so the identity is exercised in the overlapping regime.
  std::mt19937_64 gen = rng_for(5);
  std::uniform_int_distribution<int> comps(1, 3);
  std::normal_distribution<double> jitter(0.0, 0.3);
  std::exponential_distribution<double> expo(1.0);
  const double lambdas[3] = {0.25, 0.5, 1.0};
  double worst = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const MixtureModel p = random_model_g(gen, comps(gen), 1, 1.2, 0.05);
    MixtureModel q = p;
    for (int i = 0; i < q.components(); ++i) {
      q.means(i, 0) += jitter(gen);
      q.weights[i] = expo(gen) + 0.05;
    }
    q.weights /= q.weights.sum();
    const double lambda = lambdas[rep % 3];
    const KlChi2Identity r = kl_chi2_identity_check(p, q, lambda, 400);
    worst = std::max(worst, std::abs(r.lhs - r.rhs));
  }
  std::ostringstream ss;
  ss << "max |lhs - rhs| " << worst << " (tol 1e-4, 50 pairs)";
  detail = ss.str();
  return worst <= 1e-4;
}

bool criterion6(std::string& detail) {
  std::mt19937_64 gen = rng_for(6);
  std::uniform_int_distribution<int> mcomps(2, 4);
  std::uniform_int_distribution<int> ncomps(2, 6);
  const double eps_prime = 1e-6;
  int unconverged = 0, nonmonotone = 0;
  double worst_res = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const MixtureModel truth = random_model_g(gen, mcomps(gen), 1, 3.0);
    const MixtureModel fitm = random_model_g(gen, ncomps(gen), 1, 3.0);
    const auto quad = make_quadrature({&truth, &fitm});
    const int n = fitm.components();
    const WeightSolution sol = solve_weights(
        truth, fitm.means, Eigen::VectorXd::Constant(n, 1.0 / n), quad,
        eps_prime, 5000);
    unconverged += !sol.cert.converged;
    worst_res = std::max(worst_res, sol.cert.residual);
    for (std::size_t k = 1; k < sol.loss_trace.size(); ++k) {
      if (sol.loss_trace[k] > sol.loss_trace[k - 1] + 1e-10) {
        ++nonmonotone;
        break;
      }
    }
  }
  std::ostringstream ss;
  ss << unconverged << " unconverged, " << nonmonotone
     << " non-monotone, max residual " << worst_res
     << " (target 2e-6, 50 instances)";
  detail = ss.str();
  return unconverged == 0 && nonmonotone == 0 && worst_res <= 2e-6;
}

bool criterion7(std::string& detail) {
  std::mt19937_64 gen = rng_for(7);
  std::uniform_int_distribution<int> mcomps(1, 3);
  std::uniform_int_distribution<int> ncomps(2, 4);
  int violations = 0;
  double worst_rise = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const MixtureModel truth = random_model_g(gen, mcomps(gen), 1, 2.0);
    const MixtureModel fit0 =
        init_random(truth, ncomps(gen), 555 + static_cast<std::uint64_t>(rep));
    TrainConfig cfg;
    cfg.iterations = 200;
    cfg.target_eps = 0;  // run all iterations
    cfg.eps_prime = 1e-8;
    cfg.snapshot_every = 1;
    cfg.mode = PopulationMode{make_quadrature({&truth, &fit0})};
    const Trajectory traj = run_population(truth, fit0, cfg);
    for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
      const double rise =
          traj.snapshots[k].loss.value - traj.snapshots[k - 1].loss.value;
      worst_rise = std::max(worst_rise, rise);
      if (rise > 1e-10) {
        ++violations;
        break;
      }
    }
  }
  std::ostringstream ss;
  ss << violations << " non-monotone trajectories, worst rise " << worst_rise
     << " (tol 1e-10, 20 instances x 200 iterations)";
  detail = ss.str();
  return violations == 0;
}

bool criterion8(std::string& detail) {
  ensure_fig1();
  int ok15 = 0, bad5 = 0, ok5 = 0;
  for (const CellResult& c : g_fig1.n15) {
    ok15 += !c.traj.aborted && c.traj.back().loss.value <= 1e-3;
  }
  for (const CellResult& c : g_fig1.n5) {
    bad5 += c.traj.back().loss.value >= 0.05;
    ok5 += !c.traj.aborted && c.traj.back().loss.value <= 1e-3;
  }
  const double frac15 = ok15 / 10.0, frac5 = ok5 / 10.0;
  std::ostringstream ss;
  ss << "n=15: " << ok15 << "/10 reach KL<=1e-3; n=5: " << bad5
     << "/10 end with KL>=0.05; success fractions " << frac15 << " vs "
     << frac5;
  detail = ss.str();
  return ok15 >= 9 && bad5 >= 3 && frac15 > frac5;
}

bool criterion9(std::string& detail) {
  ensure_fig1();
  const double cut = g_fig1.report.delta / 4.0;
  double worst = 0;
  int converged = 0;
  for (const CellResult& c : g_fig1.n15) {
    if (c.traj.aborted || c.traj.back().loss.value > 1e-3) continue;
    ++converged;
    const Snapshot& fin = c.traj.back();
    double far_weight = 0;
    for (int i = 0; i < fin.weights.size(); ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (int l = 0; l < g_fig1.truth.components(); ++l) {
        nearest = std::min(
            nearest, (fin.means.row(i) - g_fig1.truth.means.row(l)).norm());
      }
      if (nearest > cut) far_weight += fin.weights[i];
    }
    worst = std::max(worst, far_weight);
  }
  std::ostringstream ss;
  ss << "max stray weight beyond delta/4 = " << worst << " over " << converged
     << " converged runs (tol 0.01)";
  detail = ss.str();
  return converged > 0 && worst <= 0.01;
}

bool criterion10(std::string& detail) {
  ensure_fig1();
  const WhiteningResult wr = whitening(g_fig1.truth);
  const double eps = 5e-4;  // experiment target accuracy
  const double delta_close = std::pow(eps, 0.25);
  const int m = g_fig1.truth.components();

  int converged = 0, failures = 0;
  double worst_ratio = 0;
  std::ostringstream notes;
  for (const CellResult& c : g_fig1.n15) {
    if (c.traj.aborted || c.traj.back().loss.value > 1e-3) continue;
    ++converged;
    const Snapshot& init = c.traj.front();
    const Snapshot& fin = c.traj.back();
    const MixtureModel f0(init.means, init.weights);
    const MixtureModel f1(fin.means, fin.weights);
    const IdDiagnostics d0 =
        id_diagnostics(g_fig1.truth, f0, partition(f0, g_fig1.truth), delta_close);
    const IdDiagnostics d1 =
        id_diagnostics(g_fig1.truth, f1, partition(f1, g_fig1.truth), delta_close);

    bool ok = true;
    auto ratio_check = [&](double before, double after) {
      const double r = after / std::max(before, 1e-300);
      worst_ratio = std::max(worst_ratio, r);
      ok &= after <= before / 10.0;
    };
    ratio_check(d0.weighted_distance.norm(), d1.weighted_distance.norm());
    ratio_check(d0.group_weight_error.norm(), d1.group_weight_error.norm());
    ratio_check(d0.avg_component_error.norm(), d1.avg_component_error.norm());
    for (int k = 2; k <= 4; ++k) {
      ratio_check(tensor_error(g_fig1.truth, f0, k, wr),
                  tensor_error(g_fig1.truth, f1, k, wr));
    }
    for (int l = 0; l < m; ++l) {
      ok &= d1.closeby_weight[l] >= 0.5 * g_fig1.truth.weights[l];
    }
    if (!ok) {
      ++failures;
      notes << " seed" << c.seed;
    }
  }
  std::ostringstream ss;
  ss << failures << "/" << converged
     << " converged runs violate the co-decay bounds (worst decay ratio "
     << worst_ratio << ", need <= 0.1)" << notes.str();
  detail = ss.str();
  return converged > 0 && failures == 0;
}

bool criterion11(std::string& detail) {
  // (a) unbiasedness: N = 1e6 empirical gradient vs population (quadrature)
  std::mt19937_64 gen = rng_for(11);
  std::uniform_int_distribution<int> comps(1, 4);
  int gradient_fails = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const MixtureModel truth = random_model_g(gen, comps(gen), 1, 2.5);
    const MixtureModel fit = random_model_g(gen, comps(gen), 1, 2.5);
    const Eigen::MatrixXd pop =
        grad_means_direct(truth, fit, make_quadrature({&truth, &fit}));
    const auto emp_est =
        ExpectationEstimator::monte_carlo(11000 + rep, 1000000);
    const MatrixWithStderr emp =
        grad_means_direct_with_stderr(truth, fit, emp_est);
    gradient_fails += !((emp.value - pop).norm() <= 3.0 * emp.stderr_);
  }

  // (b) online runs on the criterion-8 instance
  ExperimentConfig cfg;
  cfg.fit_sizes = {15};
  cfg.train.mode = "online";
  cfg.train.online_batch = 50000;
  cfg.train.iterations = 2000;
  cfg.train.eta = 0.06;
  cfg.train.target_eps = 3e-3;
  cfg.train.snapshot_every = 50;
  cfg.train.weight_iters = 4;
  const MixtureModel truth = build_truth(cfg);
  int ok = 0;
  for (std::uint64_t seed : cfg.seeds) {
    const Trajectory traj = run_cell(truth, cfg, 15, seed);
    ok += !traj.aborted && traj.back().loss.value <= 5e-3;
  }
  std::ostringstream ss;
  ss << gradient_fails << "/20 gradient checks outside 3 stderr; " << ok
     << "/10 online runs reach KL<=5e-3";
  detail = ss.str();
  return gradient_fails == 0 && ok >= 8;
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int id;
    const char* title;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Entry> entries = {
      {1, "gradient correctness vs finite differences", criterion1},
      {2, "Stein-form gradient equivalence", criterion2},
      {3, "Hermite identities", criterion3},
      {4, "whitening condition", criterion4},
      {5, "KL-chi2 integral identity", criterion5},
      {6, "weight-subproblem certificate", criterion6},
      {7, "descent property", criterion7},
      {8, "figure-1 phenomenon", criterion8},
      {9, "pruning of redundant components", criterion9},
      {10, "identifiability co-decay", criterion10},
      {11, "online mode", criterion11},
  };

  std::set<int> selected;
  for (int a = 1; a < argc; ++a) selected.insert(std::atoi(argv[a]));

  int failed = 0;
  for (const Entry& e : entries) {
    if (!selected.empty() && !selected.count(e.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = e.run(detail);
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("criterion %2d (%s): %s  [%s; %.1fs]\n", e.id, e.title,
                ok ? "PASS" : "FAIL", detail.c_str(), sec);
    std::fflush(stdout);
    failed += !ok;
  }
  if (failed) std::printf("%d criterion(s) FAILED\n", failed);
  return failed ? 1 : 0;
}
