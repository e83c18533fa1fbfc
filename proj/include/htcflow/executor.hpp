#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "htcflow/balancer.hpp"

namespace htc {

struct WorkItem {
  std::int64_t task_id = 0;
  std::function<void()> body;
};

struct RunEntry {
  std::int64_t task_id = 0;
  int worker_id = 0;
  double wait_s = 0.0;     // submission to start
  double setup_s = 0.0;    // simulated project copy
  double compute_s = 0.0;  // task body
  std::int64_t start_us = 0;  // relative to run start
  std::int64_t end_us = 0;
  bool ok = true;
  std::string error;
};

/// Per-task phase timings of one parallel run. Entries are ordered by task submission.
struct RunLog {
  std::vector<RunEntry> entries;
  double wall_clock_s = 0.0;
  double sequential_equivalent_s = 0.0;  // sum of compute durations
  int n_workers = 0;
  bool complete = true;  // every task ran and succeeded

  std::size_t failures() const;
  /// Sum of compute per worker (the bins of a schedule run).
  std::map<int, double> worker_compute() const;
};

/// Runs every task exactly once on a pool of `n_workers` threads fed from a FIFO queue.
/// Each task first burns `setup_cost_s` (sleep), then runs its body. Exceptions are
/// recorded per entry and do not stop the remaining tasks.
RunLog run_parallel(std::vector<WorkItem> tasks, int n_workers, double setup_cost_s = 0.0);

/// One worker per bin; each worker runs its bin's tasks in order.
/// `bodies` maps task id to body; a missing body fails that entry.
RunLog run_schedule(const Schedule& schedule, const std::map<std::int64_t, std::function<void()>>& bodies,
                    double setup_cost_s = 0.0);

/// sequential_equivalent / wall_clock
double speedup(const RunLog& log);

/// CSV: task_id,worker,wait_s,setup_s,compute_s,start_us,end_us,status
std::string format_run_log(const RunLog& log);
RunLog parse_run_log(std::string_view text);

}  // namespace htc
