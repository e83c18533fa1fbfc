#include "htcflow/executor.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <sstream>
#include <thread>

#include "htcflow/error.hpp"
#include "htcflow/surrogate.hpp"

namespace htc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) { return std::chrono::duration<double>(b - a).count(); }

std::int64_t micros_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration_cast<std::chrono::microseconds>(b - a).count();
}

void execute(const std::function<void()>& body, RunEntry& entry, int worker, double setup_cost_s,
             Clock::time_point run_start) {
  const auto picked = Clock::now();
  entry.worker_id = worker;
  entry.start_us = micros_between(run_start, picked);
  entry.wait_s = seconds_between(run_start, picked);
  burn(CostMode::sleep, setup_cost_s);
  const auto setup_done = Clock::now();
  entry.setup_s = seconds_between(picked, setup_done);
  try {
    if (!body) throw Error(Errc::missing_input, "no task body");
    body();
  } catch (const std::exception& e) {
    entry.ok = false;
    entry.error = e.what();
  } catch (...) {
    entry.ok = false;
    entry.error = "unknown exception";
  }
  const auto done = Clock::now();
  entry.compute_s = seconds_between(setup_done, done);
  entry.end_us = micros_between(run_start, done);
}

void finish(RunLog& log, Clock::time_point run_start) {
  log.wall_clock_s = seconds_between(run_start, Clock::now());
  log.sequential_equivalent_s = 0.0;
  log.complete = true;
  for (const auto& e : log.entries) {
    log.sequential_equivalent_s += e.compute_s;
    log.complete = log.complete && e.ok;
  }
}

}  // namespace

std::size_t RunLog::failures() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const RunEntry& e) { return !e.ok; }));
}

std::map<int, double> RunLog::worker_compute() const {
  std::map<int, double> out;
  for (const auto& e : entries) out[e.worker_id] += e.compute_s;
  return out;
}

RunLog run_parallel(std::vector<WorkItem> tasks, int n_workers, double setup_cost_s) {
  if (n_workers < 1) throw Error(Errc::invalid_argument, "run_parallel: n_workers must be >= 1");
  RunLog log;
  log.n_workers = n_workers;
  log.entries.resize(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) log.entries[i].task_id = tasks[i].task_id;

  // Each worker pops the next index and writes only its own entries; the join hands the
  // filled log back to this thread.
  std::atomic<std::size_t> next{0};
  const auto run_start = Clock::now();
  {
    std::vector<std::jthread> workers;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(n_workers), std::max<std::size_t>(tasks.size(), 1));
    workers.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
      workers.emplace_back([&, w] {
        for (;;) {
          const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
          if (i >= tasks.size()) return;
          execute(tasks[i].body, log.entries[i], static_cast<int>(w), setup_cost_s, run_start);
        }
      });
    }
  }
  finish(log, run_start);
  return log;
}

RunLog run_schedule(const Schedule& schedule, const std::map<std::int64_t, std::function<void()>>& bodies,
                    double setup_cost_s) {
  RunLog log;
  log.n_workers = static_cast<int>(schedule.n_bins());
  std::vector<std::pair<std::size_t, std::size_t>> offsets;  // (first entry, count) per bin
  for (const auto& bin : schedule.bins) {
    offsets.emplace_back(log.entries.size(), bin.size());
    for (auto id : bin) {
      RunEntry e;
      e.task_id = id;
      log.entries.push_back(std::move(e));
    }
  }
  static const std::function<void()> missing;
  const auto run_start = Clock::now();
  {
    std::vector<std::jthread> workers;
    for (std::size_t b = 0; b < schedule.n_bins(); ++b) {
      workers.emplace_back([&, b] {
        for (std::size_t k = 0; k < offsets[b].second; ++k) {
          RunEntry& entry = log.entries[offsets[b].first + k];
          const auto it = bodies.find(entry.task_id);
          execute(it == bodies.end() ? missing : it->second, entry, static_cast<int>(b), setup_cost_s, run_start);
        }
      });
    }
  }
  finish(log, run_start);
  return log;
}

double speedup(const RunLog& log) {
  if (log.entries.empty()) throw Error(Errc::invalid_argument, "speedup: empty run log");
  return speedup(log.sequential_equivalent_s, log.wall_clock_s);
}

std::string format_run_log(const RunLog& log) {
  std::string out;
  out += "# wall_clock_s=" + format_double17(log.wall_clock_s) + "\n";
  out += "# sequential_equivalent_s=" + format_double17(log.sequential_equivalent_s) + "\n";
  out += "# n_workers=" + std::to_string(log.n_workers) + "\n";
  out += std::string("# complete=") + (log.complete ? "true" : "false") + "\n";
  out += "task_id,worker,wait_s,setup_s,compute_s,start_us,end_us,status\n";
  for (const auto& e : log.entries) {
    std::string status = e.ok ? "ok" : "failed: " + e.error;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out += std::to_string(e.task_id) + ',' + std::to_string(e.worker_id) + ',' + format_double17(e.wait_s) + ',' +
           format_double17(e.setup_s) + ',' + format_double17(e.compute_s) + ',' + std::to_string(e.start_us) + ',' +
           std::to_string(e.end_us) + ',' + status + '\n';
  }
  return out;
}

namespace {

template <typename Int>
Int parse_int(std::string_view token) {
  Int value{};
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error(Errc::malformed_row, "run log: bad integer '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

RunLog parse_run_log(std::string_view text) {
  RunLog log;
  bool header_seen = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string_view value = std::string_view(line).substr(eq + 1);
      if (key == "wall_clock_s") log.wall_clock_s = parse_double(value);
      else if (key == "sequential_equivalent_s") log.sequential_equivalent_s = parse_double(value);
      else if (key == "n_workers") log.n_workers = parse_int<int>(value);
      else if (key == "complete") log.complete = value == "true";
      continue;
    }
    if (!header_seen) {
      if (line != "task_id,worker,wait_s,setup_s,compute_s,start_us,end_us,status") {
        throw Error(Errc::malformed_header, "run log: unexpected header");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> parts;
    std::string_view rest(line);
    for (int k = 0; k < 7; ++k) {
      const auto comma = rest.find(',');
      if (comma == std::string_view::npos) throw Error(Errc::malformed_row, "run log: too few columns");
      parts.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    RunEntry e;
    e.task_id = parse_int<std::int64_t>(parts[0]);
    e.worker_id = parse_int<int>(parts[1]);
    e.wait_s = parse_double(parts[2]);
    e.setup_s = parse_double(parts[3]);
    e.compute_s = parse_double(parts[4]);
    e.start_us = parse_int<std::int64_t>(parts[5]);
    e.end_us = parse_int<std::int64_t>(parts[6]);
    e.ok = rest == "ok";
    if (!e.ok) e.error = std::string(rest.substr(std::min<std::size_t>(rest.size(), 8)));
    log.entries.push_back(std::move(e));
  }
  if (!header_seen) throw Error(Errc::malformed_header, "run log: missing header");
  return log;
}

}  // namespace htc
