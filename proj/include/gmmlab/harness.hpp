#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmmlab/model.hpp"
#include "gmmlab/trainer.hpp"

namespace gmmlab {

// Ground truth source: an explicit model file, or a generator drawing means
// i.i.d. from N(0, delta^2 I) followed by recentering.
struct GeneratorSpec {
  int m = 5;
  int d = 8;
  double delta = 12.0;
  std::string weights = "equal";  // "equal" only; explicit lists use a file
  std::uint64_t seed = 7;
};

struct TrainSettings {
  std::string mode = "population";  // "population" | "online"
  std::int64_t mc_count = 20000;    // population-mode MC sample count
  std::int64_t online_batch = 50000;
  int iterations = 5000;
  double target_eps = 5e-4;
  double eta = 0;        // 0 = trainer default
  double eps_prime = 0;  // 0 = target_eps^2 / n
  int snapshot_every = 50;
  int weight_iters = 12;
};

struct ExperimentConfig {
  std::optional<std::string> truth_file;
  std::optional<GeneratorSpec> generator = GeneratorSpec{};
  std::vector<int> fit_sizes = {5, 10, 15};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  TrainSettings train;
  double kl_threshold = 1e-3;     // summarize success cut
  double prune_threshold = 1e-3;  // summarize pruned-count cut
  double delta_close_scale = 1.0; // delta_close = scale * target_eps^{1/4}
};

// parse with defaults; honors the GMMLAB_SEED environment override
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const nlohmann::json& j);

// per-(n, seed) file names inside the output directory
std::string trajectory_name(int n, std::uint64_t seed);
std::string snapshots_name(int n, std::uint64_t seed);
std::string diagnostics_name(int n, std::uint64_t seed);

// derived estimator / init streams for one experiment cell
std::uint64_t init_seed(std::uint64_t run_seed);
std::uint64_t estimator_seed(std::uint64_t run_seed);

// builds the truth model of a config (generator or file); no gate applied
MixtureModel build_truth(const ExperimentConfig& cfg);

TrainConfig build_train_config(const ExperimentConfig& cfg, int n,
                               std::uint64_t run_seed);

// Runs one cell and returns the trajectory (no file output).
Trajectory run_cell(const MixtureModel& truth, const ExperimentConfig& cfg,
                    int n, std::uint64_t run_seed);

// Exit codes: 0 success, 2 validation failure, 3 numerical abort.
int cmd_gen(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
int cmd_fit(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
            int jobs);
int cmd_diagnose(const ExperimentConfig& cfg,
                 const std::filesystem::path& out_dir);
int cmd_summarize(const ExperimentConfig& cfg,
                  const std::filesystem::path& out_dir);

}  // namespace gmmlab
