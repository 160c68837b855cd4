#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gmmlab/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gmmlab: over-parameterized gradient EM for isotropic GMMs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int jobs = 1;

  auto add_common = [&](CLI::App* cmd, bool with_jobs) {
    cmd->add_option("--config", config_path, "experiment config JSON")
        ->required();
    cmd->add_option("--out", out_dir, "output directory");
    if (with_jobs) {
      cmd->add_option("--jobs", jobs, "parallel (n, seed) cells")
          ->check(CLI::PositiveNumber);
    }
  };

  CLI::App* gen = app.add_subcommand("gen", "generate and validate a truth model");
  CLI::App* fit = app.add_subcommand("fit", "train one trajectory per (n, seed)");
  CLI::App* diagnose =
      app.add_subcommand("diagnose", "identifiability diagnostics per snapshot");
  CLI::App* summarize =
      app.add_subcommand("summarize", "aggregate trajectories into summary.json");
  add_common(gen, false);
  add_common(fit, true);
  add_common(diagnose, false);
  add_common(summarize, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const gmmlab::ExperimentConfig cfg = gmmlab::load_config(config_path);
    if (gen->parsed()) return gmmlab::cmd_gen(cfg, out_dir);
    if (fit->parsed()) return gmmlab::cmd_fit(cfg, out_dir, jobs);
    if (diagnose->parsed()) return gmmlab::cmd_diagnose(cfg, out_dir);
    if (summarize->parsed()) return gmmlab::cmd_summarize(cfg, out_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
