#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "htcflow/cdiag.hpp"
#include "htcflow/documents.hpp"
#include "htcflow/executor.hpp"
#include "htcflow/ga_cluster.hpp"
#include "htcflow/surrogate.hpp"

namespace htc {

struct FaceSpec {
  FaceId face_id = 0;
  int rows = 2;
  int cols = 2;
  double width = 1.0;   // m
  double height = 1.0;  // m
  Point3 origin = Point3::Zero();
  Axis normal_axis = Axis::z;
  /// Surrogate modulation seed; defaults to surrogate.face_phase + face_id.
  std::optional<std::int64_t> phase;
};

/// Optional synthetic clustering cost c0 + c1 n + c2 n^2 seconds per face, burned on top of
/// the real clustering work. Lets a desk run show the runtime spread of large faces.
struct ClusterCost {
  CostMode mode = CostMode::none;
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double seconds(std::size_t n_nodes) const {
    const double n = static_cast<double>(n_nodes);
    return c0 + c1 * n + c2 * n * n;
  }
};

struct PipelineConfig {
  std::vector<FaceSpec> faces;
  CaseGrid case_grid;
  SurrogateParams surrogate;
  GAParams ga;
  std::size_t m = 8;
  std::map<FaceId, std::size_t> m_per_face;
  FitnessOptions rbf;
  std::optional<CDAxes> cd_axes;  // default: the case grid itself
  double cd_lambda = 1e-3;
  std::optional<int> workers;
  double setup_cost_s = 0.0;
  double probe_fraction = 0.25;
  ClusterCost cluster_cost;
  std::filesystem::path output_dir = "htcflow_run";
  std::uint64_t rng_seed = 0;

  void validate() const;
  std::size_t m_for(FaceId face_id) const;
  CDAxes axes() const { return cd_axes.value_or(CDAxes::from_grid(case_grid)); }
  std::vector<Face> build_faces() const;
  SurrogateParams surrogate_for(const FaceSpec& spec) const;
  GAParams ga_for(FaceId face_id) const;
};

void to_json(Json& j, const PipelineConfig& c);
void from_json(const Json& j, PipelineConfig& c);
PipelineConfig load_config(const std::filesystem::path& path);

/// Exit statuses shared by the pipeline commands and the CLI.
namespace exit_status {
inline constexpr int ok = 0;
inline constexpr int validation = 2;
inline constexpr int partial = 3;
}  // namespace exit_status

struct CommandResult {
  int exit_code = exit_status::ok;
  std::string message;
};

/// Output tree below PipelineConfig::output_dir.
struct RunPaths {
  std::filesystem::path root;
  std::filesystem::path manifest() const { return root / "cases.json"; }
  std::filesystem::path fields_dir() const { return root / "fields"; }
  std::filesystem::path field(FaceId f, CaseId c) const { return fields_dir() / htc_file_name(f, c); }
  std::filesystem::path subsets_dir() const { return root / "subsets"; }
  std::filesystem::path subset(FaceId f) const { return subsets_dir() / ("face_" + std::to_string(f) + ".json"); }
  std::filesystem::path schedule() const { return root / "schedule.json"; }
  std::filesystem::path cd_dir() const { return root / "cd"; }
  std::filesystem::path cd_set(FaceId f) const { return cd_dir() / ("face_" + std::to_string(f) + ".json"); }
  std::filesystem::path logs_dir() const { return root / "logs"; }
  std::filesystem::path simulate_log() const { return logs_dir() / "simulate.csv"; }
  std::filesystem::path cluster_log() const { return logs_dir() / "cluster.csv"; }
  std::filesystem::path query_dir() const { return root / "query"; }
  std::filesystem::path report_dir() const { return root / "report"; }
};

/// Writes `text` to `path + ".partial"` and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);
std::string read_file(const std::filesystem::path& path);

/// Exclusive marker file guarding one output directory against concurrent commands.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

CommandResult cmd_gen_cases(const PipelineConfig& config);
CommandResult cmd_simulate(const PipelineConfig& config);
CommandResult cmd_cluster(const PipelineConfig& config);
CommandResult cmd_train_cd(const PipelineConfig& config);

struct QueryRequest {
  FaceId face_id = 0;
  double t_air = 20.0;
  double v = 0.0;
  double az = 0.0;
  double el = 0.0;
};

struct QueryOutcome {
  Reconstruction reconstruction;
  std::optional<CaseId> training_case;  // set when the request matches a training case
  // Filled for training cases only:
  double max_nodal_error = 0.0;  // |reconstruction - simulated field|
  double stage2_fitness = 0.0;
  double cd_residual = 0.0;       // CD error at the subset, carried through the RBF interpolant
  double cd_residual_raw = 0.0;   // max |CD(case) - w| at the subset nodes
  bool within_bound = true;
};

QueryOutcome run_query(const PipelineConfig& config, const QueryRequest& request);
CommandResult cmd_query(const PipelineConfig& config, const QueryRequest& request);
CommandResult cmd_report(const PipelineConfig& config);

}  // namespace htc
