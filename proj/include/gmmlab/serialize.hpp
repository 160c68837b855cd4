#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmmlab/identifiability.hpp"
#include "gmmlab/model.hpp"
#include "gmmlab/trainer.hpp"

namespace gmmlab {

// Model schema: {"dim": int, "weights": [float], "means": [[float]]};
// floats round-trip exactly.
nlohmann::json model_to_json(const MixtureModel& model);
MixtureModel model_from_json(const nlohmann::json& j);
void save_model(const MixtureModel& model, const std::filesystem::path& path);
MixtureModel load_model(const std::filesystem::path& path);

// %.17g, enough digits to reproduce the double exactly
std::string format_double(double x);

// header: iter,loss,loss_stderr,potential_U,kkt_residual,grad_norm
void write_trajectory_csv(const Trajectory& traj,
                          const std::filesystem::path& path);

// full snapshot state (parameters included) for post-hoc diagnostics
void write_snapshots_json(const Trajectory& traj,
                          const std::filesystem::path& path);
Trajectory read_snapshots_json(const std::filesystem::path& path);

// rows: snapshot_iter,l,weighted_distance,group_weight_error,closeby_weight,
//       avg_component_error,tensor_error_k2,tensor_error_k3,tensor_error_k4
struct DiagnosticsRow {
  int snapshot_iter = 0;
  int group = 0;
  IdDiagnostics diag;           // only entry [group] is used per row
  double tensor_error_k2 = 0;   // shared by the snapshot's rows
  double tensor_error_k3 = 0;
  double tensor_error_k4 = 0;
};
void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows,
                           const std::filesystem::path& path);

// minimal CSV reader: returns one map per row keyed by header name
std::vector<std::map<std::string, double>> read_csv(
    const std::filesystem::path& path);

}  // namespace gmmlab
