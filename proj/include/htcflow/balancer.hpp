#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "htcflow/domain.hpp"

namespace htc {

/// Quadratic runtime model t(n) = c0 + c1 n + c2 n^2 fitted to measured (n_nodes, seconds).
struct RuntimeModel {
  double c0 = 0.0;  // s
  double c1 = 0.0;  // s / node
  double c2 = 0.0;  // s / node^2
  std::vector<std::pair<double, double>> sample_points;
  std::vector<double> residuals;  // measured - fitted, per sample
  int degree = 2;                 // < 2 only for the reduced fits used when abscissae repeat

  static constexpr double kMinSeconds = 1e-6;
};

/// Least-squares quadratic. Throws Error{rank_deficient} with fewer than 3 distinct abscissae.
RuntimeModel fit_runtime_model(std::span<const std::pair<double, double>> samples);

/// Like fit_runtime_model, but drops to a linear or constant fit when there are fewer than
/// 3 distinct abscissae.
RuntimeModel fit_runtime_model_reduced(std::span<const std::pair<double, double>> samples);

/// max(c0 + c1 n + c2 n^2, 1e-6)
double estimate(const RuntimeModel& model, double n_nodes);

struct Task {
  std::int64_t task_id = 0;  // the face id
  std::size_t n_nodes = 1;
  double estimated_seconds = 1.0;
  std::optional<double> measured_seconds;
};

struct Schedule {
  std::vector<std::vector<std::int64_t>> bins;  // task ids in execution order
  std::vector<double> bin_loads;                // estimated seconds per bin
  double makespan = 0.0;
  std::size_t n_bins() const noexcept { return bins.size(); }
};

/// Largest estimate first (ties: smaller task id), each onto the least-loaded bin (ties: lower index).
Schedule pack(std::span<const Task> tasks, std::size_t n_bins);

struct BalanceTrace {
  Schedule schedule;
  std::vector<double> makespans;  // M_1, M_2, ... as evaluated
};

/// Grows the bin count while the packed makespan does not increase (1e-9 s tolerance) and
/// has not yet reached the largest single estimate; returns the fewest bins attaining the
/// smallest makespan seen.
BalanceTrace balance_traced(std::span<const Task> tasks);
Schedule balance(std::span<const Task> tasks);

constexpr double kBalanceTolerance = 1e-9;

/// Faces to time before fitting: the smallest ones plus evenly spaced medium ones, never
/// the largest. Returns indices into `sizes`.
std::vector<std::size_t> select_probes(std::span<const std::size_t> sizes, double probe_fraction);

struct FaceWork {
  FaceId face_id = 0;
  std::size_t n_nodes = 1;
};

struct MeasuredBalance {
  std::optional<RuntimeModel> model;
  Schedule schedule;
  std::vector<Task> tasks;              // estimates used for packing; probes carry measurements
  std::vector<FaceId> probe_faces;
};

/// Times the probe faces with `run_probe` (returns seconds), fits the runtime model,
/// estimates the rest and balances. With fewer than 3 faces: one bin and no model.
MeasuredBalance measure_and_balance(std::span<const FaceWork> faces, double probe_fraction,
                                    const std::function<double(const FaceWork&)>& run_probe);

/// sequential / parallel
double speedup(double sequential_seconds, double parallel_seconds);

}  // namespace htc
