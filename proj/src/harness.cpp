#include "gmmlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "gmmlab/divergence.hpp"
#include "gmmlab/identifiability.hpp"
#include "gmmlab/rng.hpp"
#include "gmmlab/serialize.hpp"

namespace gmmlab {

namespace fs = std::filesystem;

namespace {

nlohmann::json assumption_report_json(const AssumptionReport& rep, int n) {
  nlohmann::json j;
  j["n"] = n;
  j["lambda_min"] = rep.lambda_min;
  j["lambda_max"] = rep.lambda_max;
  j["d_min"] = rep.d_min;
  j["d_max"] = rep.d_max;
  j["delta"] = rep.delta;
  j["pi_min_star"] = rep.pi_min_star;
  j["sep_term_log"] = rep.sep_term_log;
  j["sep_term_bound"] = rep.sep_term_bound;
  j["sep_term_dim"] = rep.sep_term_dim;
  j["rank_ok"] = rep.rank_ok;
  j["bounded_ok"] = rep.bounded_ok;
  j["separated_ok"] = rep.separated_ok;
  return j;
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Desk-scale generation gate: full-rank second moment plus separation at
// least sqrt(d / pi*_min). The C = 1 variants of the remaining assumption
// flags are reported but not gated on (no desk-scale instance meets them).
bool generation_gate(const AssumptionReport& rep, int m) {
  return rep.rank_ok && (m < 2 || rep.delta >= rep.sep_term_dim);
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("truth")) {
    const nlohmann::json& t = j.at("truth");
    if (t.contains("file")) {
      cfg.truth_file = t.at("file").get<std::string>();
      cfg.generator.reset();
    } else if (t.contains("generator")) {
      GeneratorSpec g;
      const nlohmann::json& gj = t.at("generator");
      g.m = gj.value("m", g.m);
      g.d = gj.value("d", g.d);
      g.delta = gj.value("delta", g.delta);
      g.weights = gj.value("weights", g.weights);
      g.seed = gj.value("seed", g.seed);
      cfg.generator = g;
    }
  }
  if (j.contains("fit_sizes")) cfg.fit_sizes = j.at("fit_sizes").get<std::vector<int>>();
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("train")) {
    const nlohmann::json& t = j.at("train");
    cfg.train.mode = t.value("mode", cfg.train.mode);
    cfg.train.mc_count = t.value("mc_count", cfg.train.mc_count);
    cfg.train.online_batch = t.value("online_batch", cfg.train.online_batch);
    cfg.train.iterations = t.value("iterations", cfg.train.iterations);
    cfg.train.target_eps = t.value("target_eps", cfg.train.target_eps);
    cfg.train.eta = t.value("eta", cfg.train.eta);
    cfg.train.eps_prime = t.value("eps_prime", cfg.train.eps_prime);
    cfg.train.snapshot_every = t.value("snapshot_every", cfg.train.snapshot_every);
    cfg.train.weight_iters = t.value("weight_iters", cfg.train.weight_iters);
  }
  cfg.kl_threshold = j.value("kl_threshold", cfg.kl_threshold);
  cfg.prune_threshold = j.value("prune_threshold", cfg.prune_threshold);
  cfg.delta_close_scale = j.value("delta_close_scale", cfg.delta_close_scale);
  if (cfg.fit_sizes.empty() || cfg.seeds.empty())
    throw std::invalid_argument("config: need at least one fit size and one seed");

  if (const char* env = std::getenv("GMMLAB_SEED")) {
    const std::uint64_t s = std::strtoull(env, nullptr, 10);
    if (cfg.generator) cfg.generator->seed = s;
    cfg.seeds = {s};
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  nlohmann::json j;
  in >> j;
  return config_from_json(j);
}

std::string trajectory_name(int n, std::uint64_t seed) {
  return "traj_n" + std::to_string(n) + "_seed" + std::to_string(seed) + ".csv";
}
std::string snapshots_name(int n, std::uint64_t seed) {
  return "snap_n" + std::to_string(n) + "_seed" + std::to_string(seed) + ".json";
}
std::string diagnostics_name(int n, std::uint64_t seed) {
  return "diag_n" + std::to_string(n) + "_seed" + std::to_string(seed) + ".csv";
}

std::uint64_t init_seed(std::uint64_t run_seed) {
  return mix64(run_seed ^ 0x1234f00dULL);
}
std::uint64_t estimator_seed(std::uint64_t run_seed) {
  return mix64(run_seed ^ 0xabcd5eedULL);
}

MixtureModel build_truth(const ExperimentConfig& cfg) {
  if (cfg.truth_file) {
    return load_model(*cfg.truth_file);
  }
  if (!cfg.generator) throw std::invalid_argument("config: no truth source");
  const GeneratorSpec& g = *cfg.generator;
  if (g.m < 1 || g.d < 1 || !(g.delta > 0))
    throw std::invalid_argument("generator: invalid m/d/delta");
  if (g.weights != "equal")
    throw std::invalid_argument("generator: only the equal weight profile is "
                                "built in; pass explicit models via a file");
  const CounterRng rng(g.seed, /*stream=*/0x6e);
  Eigen::MatrixXd means(g.m, g.d);
  for (int i = 0; i < g.m; ++i) {
    for (int c = 0; c < g.d; c += 2) {
      double z0, z1;
      rng.normal_pair(static_cast<std::uint64_t>(i * g.d + c), z0, z1);
      means(i, c) = g.delta * z0;
      if (c + 1 < g.d) means(i, c + 1) = g.delta * z1;
    }
  }
  Eigen::VectorXd w = Eigen::VectorXd::Constant(g.m, 1.0 / g.m);
  MixtureModel truth(std::move(means), std::move(w));
  if (g.m >= 2) {
    // Recentering pins the mean norms into [delta/2, D], but it also makes
    // the shifted closest pair exactly antiparallel, dropping the second
    // moment to rank m - 1. When that kills the non-degeneracy gate while
    // the raw draw passes it (the typical case for means ~ N(0, delta^2 I)
    // whose norms are already bounded below), keep the raw draw: the origin
    // is then already a valid choice in the sense of the shifted-norm lemma.
    const int n_max =
        *std::max_element(cfg.fit_sizes.begin(), cfg.fit_sizes.end());
    MixtureModel shifted = recenter(truth).first;
    if (generation_gate(check_assumptions(shifted, n_max), g.m) ||
        !generation_gate(check_assumptions(truth, n_max), g.m)) {
      truth = std::move(shifted);
    }
  }
  return truth;
}

TrainConfig build_train_config(const ExperimentConfig& cfg, int n,
                               std::uint64_t run_seed) {
  TrainConfig tc;
  tc.eta = cfg.train.eta;
  tc.iterations = cfg.train.iterations;
  tc.target_eps = cfg.train.target_eps;
  tc.eps_prime = cfg.train.eps_prime;
  tc.snapshot_every = cfg.train.snapshot_every;
  tc.weight_iters = cfg.train.weight_iters;
  if (cfg.train.mode == "online") {
    tc.mode = OnlineMode{cfg.train.online_batch, estimator_seed(run_seed)};
  } else if (cfg.train.mode == "population") {
    tc.mode = PopulationMode{ExpectationEstimator::monte_carlo(
        estimator_seed(run_seed), cfg.train.mc_count)};
  } else {
    throw std::invalid_argument("config: unknown train mode " + cfg.train.mode);
  }
  (void)n;
  return tc;
}

Trajectory run_cell(const MixtureModel& truth, const ExperimentConfig& cfg,
                    int n, std::uint64_t run_seed) {
  const MixtureModel fit0 = init_random(truth, n, init_seed(run_seed));
  const TrainConfig tc = build_train_config(cfg, n, run_seed);
  return cfg.train.mode == "online" ? run_online(truth, fit0, tc)
                                    : run_population(truth, fit0, tc);
}

int cmd_gen(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  MixtureModel truth = build_truth(cfg);
  const int n_max = *std::max_element(cfg.fit_sizes.begin(), cfg.fit_sizes.end());
  const AssumptionReport rep = check_assumptions(truth, n_max);
  write_json_file(out_dir / "assumptions.json", assumption_report_json(rep, n_max));
  if (!generation_gate(rep, truth.components())) {
    std::cerr << "gen: assumption check failed (rank_ok="
              << (rep.rank_ok ? "true" : "false") << ", delta=" << rep.delta
              << ", required separation=" << rep.sep_term_dim
              << "); report written to " << (out_dir / "assumptions.json")
              << "\n";
    return 2;
  }
  save_model(truth, out_dir / "truth.json");
  return 0;
}

int cmd_fit(const ExperimentConfig& cfg, const fs::path& out_dir, int jobs) {
  const fs::path truth_path = out_dir / "truth.json";
  if (!fs::exists(truth_path)) {
    std::cerr << "fit: missing " << truth_path << " (run gen first)\n";
    return 2;
  }
  const MixtureModel truth = load_model(truth_path);

  struct Cell {
    int n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int n : cfg.fit_sizes) {
    for (std::uint64_t s : cfg.seeds) cells.push_back({n, s});
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> any_abort{false};
  const Exec saved = default_exec();
  if (jobs > 1) set_default_exec(Exec::Serial);  // cells own the parallelism
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      const Cell cell = cells[idx];
      const Trajectory traj = run_cell(truth, cfg, cell.n, cell.seed);
      write_trajectory_csv(traj, out_dir / trajectory_name(cell.n, cell.seed));
      write_snapshots_json(traj, out_dir / snapshots_name(cell.n, cell.seed));
      if (traj.aborted) any_abort = true;
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  set_default_exec(saved);
  return any_abort ? 3 : 0;
}

int cmd_diagnose(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const fs::path truth_path = out_dir / "truth.json";
  if (!fs::exists(truth_path)) {
    std::cerr << "diagnose: missing " << truth_path << "\n";
    return 2;
  }
  const MixtureModel truth = load_model(truth_path);
  const WhiteningResult wr = whitening(truth);
  const double delta_close =
      cfg.delta_close_scale * std::pow(cfg.train.target_eps, 0.25);

  for (int n : cfg.fit_sizes) {
    for (std::uint64_t s : cfg.seeds) {
      const fs::path snap_path = out_dir / snapshots_name(n, s);
      if (!fs::exists(snap_path)) {
        std::cerr << "diagnose: missing snapshots " << snap_path << "\n";
        return 2;
      }
      const Trajectory traj = read_snapshots_json(snap_path);
      if (traj.snapshots.empty()) {
        std::cerr << "diagnose: no snapshots in " << snap_path << "\n";
        return 2;
      }
      std::vector<DiagnosticsRow> rows;
      for (const Snapshot& snap : traj.snapshots) {
        MixtureModel fit(snap.means, snap.weights);
        const Partition part = partition(fit, truth);
        const IdDiagnostics diag = id_diagnostics(truth, fit, part, delta_close);
        const double t2 = tensor_error(truth, fit, 2, wr);
        const double t3 = tensor_error(truth, fit, 3, wr);
        const double t4 = tensor_error(truth, fit, 4, wr);
        for (int l = 0; l < truth.components(); ++l) {
          rows.push_back(DiagnosticsRow{snap.iter, l, diag, t2, t3, t4});
        }
      }
      write_diagnostics_csv(rows, out_dir / diagnostics_name(n, s));
    }
  }
  return 0;
}

int cmd_summarize(const ExperimentConfig& cfg, const fs::path& out_dir) {
  nlohmann::json per_n = nlohmann::json::array();
  int found = 0;
  for (int n : cfg.fit_sizes) {
    std::vector<double> finals;
    std::vector<int> pruned_counts;
    int successes = 0;
    for (std::uint64_t s : cfg.seeds) {
      const fs::path traj_path = out_dir / trajectory_name(n, s);
      if (!fs::exists(traj_path)) continue;
      const auto rows = read_csv(traj_path);
      if (rows.empty()) continue;
      ++found;
      const double final_kl = rows.back().at("loss");
      finals.push_back(final_kl);
      if (final_kl <= cfg.kl_threshold) ++successes;
      const fs::path snap_path = out_dir / snapshots_name(n, s);
      if (fs::exists(snap_path)) {
        const Trajectory traj = read_snapshots_json(snap_path);
        MixtureModel fit(traj.back().means, traj.back().weights);
        pruned_counts.push_back(
            static_cast<int>(detect_pruned(fit, cfg.prune_threshold).size()));
      }
    }
    if (finals.empty()) continue;
    nlohmann::json e;
    e["n"] = n;
    e["runs"] = finals.size();
    e["success_fraction"] =
        static_cast<double>(successes) / static_cast<double>(finals.size());
    e["kl_threshold"] = cfg.kl_threshold;
    e["median_final_kl"] = median(finals);
    e["final_kl"] = finals;
    e["pruned_components"] = pruned_counts;
    per_n.push_back(std::move(e));
  }
  if (found == 0) {
    std::cerr << "summarize: no trajectories under " << out_dir << "\n";
    return 2;
  }
  nlohmann::json j;
  j["cells"] = std::move(per_n);
  write_json_file(out_dir / "summary.json", j);
  return 0;
}

}  // namespace gmmlab
