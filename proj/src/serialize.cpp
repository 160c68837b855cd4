#include "gmmlab/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gmmlab {

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& a, Eigen::Index cols) {
  Eigen::MatrixXd m(a.size(), cols);
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r].size() != static_cast<std::size_t>(cols))
      throw std::invalid_argument("model json: ragged means");
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), c) = a[r][static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

nlohmann::json model_to_json(const MixtureModel& model) {
  nlohmann::json j;
  j["dim"] = model.dim();
  j["weights"] = vector_to_json(model.weights);
  j["means"] = matrix_to_json(model.means);
  return j;
}

MixtureModel model_from_json(const nlohmann::json& j) {
  const int dim = j.at("dim").get<int>();
  Eigen::VectorXd w = vector_from_json(j.at("weights"));
  Eigen::MatrixXd means = matrix_from_json(j.at("means"), dim);
  return MixtureModel(std::move(means), std::move(w));
}

void save_model(const MixtureModel& model, const std::filesystem::path& path) {
  write_text(path, model_to_json(model).dump(2) + "\n");
}

MixtureModel load_model(const std::filesystem::path& path) {
  return model_from_json(nlohmann::json::parse(read_text(path)));
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_trajectory_csv(const Trajectory& traj,
                          const std::filesystem::path& path) {
  std::ostringstream out;
  out << "iter,loss,loss_stderr,potential_U,kkt_residual,grad_norm\n";
  for (const Snapshot& s : traj.snapshots) {
    out << s.iter << ',' << format_double(s.loss.value) << ','
        << format_double(s.loss.stderr_) << ',' << format_double(s.potential_u)
        << ',' << format_double(s.kkt_residual) << ','
        << format_double(s.grad_norm) << '\n';
  }
  write_text(path, out.str());
}

void write_snapshots_json(const Trajectory& traj,
                          const std::filesystem::path& path) {
  nlohmann::json j;
  j["aborted"] = traj.aborted;
  j["early_stopped"] = traj.early_stopped;
  nlohmann::json snaps = nlohmann::json::array();
  for (const Snapshot& s : traj.snapshots) {
    nlohmann::json e;
    e["iter"] = s.iter;
    e["loss"] = s.loss.value;
    e["loss_stderr"] = s.loss.stderr_;
    e["potential_U"] = s.potential_u;
    e["kkt_residual"] = s.kkt_residual;
    e["grad_norm"] = s.grad_norm;
    e["weights"] = vector_to_json(s.weights);
    e["means"] = matrix_to_json(s.means);
    snaps.push_back(std::move(e));
  }
  j["snapshots"] = std::move(snaps);
  write_text(path, j.dump() + "\n");
}

Trajectory read_snapshots_json(const std::filesystem::path& path) {
  const nlohmann::json j = nlohmann::json::parse(read_text(path));
  Trajectory traj;
  traj.aborted = j.at("aborted").get<bool>();
  traj.early_stopped = j.at("early_stopped").get<bool>();
  for (const nlohmann::json& e : j.at("snapshots")) {
    Snapshot s;
    s.iter = e.at("iter").get<int>();
    s.loss.value = e.at("loss").get<double>();
    s.loss.stderr_ = e.at("loss_stderr").get<double>();
    s.potential_u = e.at("potential_U").get<double>();
    s.kkt_residual = e.at("kkt_residual").get<double>();
    s.grad_norm = e.at("grad_norm").get<double>();
    s.weights = vector_from_json(e.at("weights"));
    const Eigen::Index dim =
        s.weights.size() > 0 && e.at("means").size() > 0
            ? static_cast<Eigen::Index>(e.at("means")[0].size())
            : 0;
    s.means = matrix_from_json(e.at("means"), dim);
    traj.snapshots.push_back(std::move(s));
  }
  return traj;
}

void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows,
                           const std::filesystem::path& path) {
  std::ostringstream out;
  out << "snapshot_iter,l,weighted_distance,group_weight_error,closeby_weight,"
         "avg_component_error,tensor_error_k2,tensor_error_k3,tensor_error_k4\n";
  for (const DiagnosticsRow& r : rows) {
    out << r.snapshot_iter << ',' << r.group << ','
        << format_double(r.diag.weighted_distance[r.group]) << ','
        << format_double(r.diag.group_weight_error[r.group]) << ','
        << format_double(r.diag.closeby_weight[r.group]) << ','
        << format_double(r.diag.avg_component_error[r.group]) << ','
        << format_double(r.tensor_error_k2) << ','
        << format_double(r.tensor_error_k3) << ','
        << format_double(r.tensor_error_k4) << '\n';
  }
  write_text(path, out.str());
}

std::vector<std::map<std::string, double>> read_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) return {};
  std::vector<std::string> headers;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) headers.push_back(cell);
  }
  std::vector<std::map<std::string, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::map<std::string, double> row;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',') && col < headers.size()) {
      // strtod, not stod: stod throws on subnormals (ERANGE)
      row[headers[col]] = std::strtod(cell.c_str(), nullptr);
      ++col;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gmmlab
