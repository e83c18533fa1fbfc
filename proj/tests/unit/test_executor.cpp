#include <doctest.h>

#include <atomic>
#include <stdexcept>
#include <thread>

#include "htcflow/error.hpp"
#include "htcflow/executor.hpp"

using namespace htc;

namespace {

void nap(double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); }

std::vector<WorkItem> naps(std::size_t n, double s) {
  std::vector<WorkItem> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({static_cast<std::int64_t>(i), [s] { nap(s); }});
  return out;
}

// per-worker entries must not overlap in time
void check_invariants(const RunLog& log) {
  std::int64_t max_end = 0, min_start = INT64_MAX;
  for (const auto& e : log.entries) {
    CHECK(e.end_us >= e.start_us);
    max_end = std::max(max_end, e.end_us);
    min_start = std::min(min_start, e.start_us);
    for (const auto& o : log.entries) {
      if (&o == &e || o.worker_id != e.worker_id) continue;
      CHECK((o.end_us <= e.start_us || e.end_us <= o.start_us));
    }
  }
  if (!log.entries.empty()) CHECK(log.wall_clock_s >= (max_end - min_start) * 1e-6 - 1e-6);
}

}  // namespace

TEST_CASE("every task runs exactly once") {
  std::vector<std::atomic<int>> hits(40);
  std::vector<WorkItem> tasks;
  for (std::size_t i = 0; i < hits.size(); ++i) tasks.push_back({static_cast<std::int64_t>(i), [&, i] { ++hits[i]; }});
  const auto log = run_parallel(std::move(tasks), 6);
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK(log.complete);
  CHECK(log.entries.size() == 40);
  check_invariants(log);
}

TEST_CASE("at most n_workers run concurrently") {
  std::atomic<int> live{0}, peak{0};
  std::vector<WorkItem> tasks;
  for (int i = 0; i < 12; ++i)
    tasks.push_back({i, [&] {
                       const int now = ++live;
                       int p = peak.load();
                       while (now > p && !peak.compare_exchange_weak(p, now)) {
                       }
                       nap(0.01);
                       --live;
                     }});
  run_parallel(std::move(tasks), 3);
  CHECK(peak.load() <= 3);
  CHECK(peak.load() >= 2);
}

TEST_CASE("one task, one worker") {
  const auto log = run_parallel(naps(1, 0.05), 1, 0.01);
  CHECK(log.wall_clock_s >= 0.06);
  CHECK(log.wall_clock_s < 0.06 * 1.5 + 0.02);
  CHECK(log.entries[0].setup_s >= 0.01);
  CHECK(log.entries[0].compute_s >= 0.05);
  CHECK(speedup(log) == doctest::Approx(log.sequential_equivalent_s / log.wall_clock_s));
  CHECK(speedup(log) <= 1.0);
}

TEST_CASE("n equal tasks on P workers take about ceil(n/P) t") {
  const double t = 0.05;
  const auto log = run_parallel(naps(10, t), 4);
  const double expect = 3 * t;
  CHECK(log.wall_clock_s >= expect * 0.9);
  CHECK(log.wall_clock_s <= expect * 1.1 + 0.01);
  check_invariants(log);
}

TEST_CASE("failures are recorded and the rest still run") {
  std::atomic<int> ran{0};
  std::vector<WorkItem> tasks;
  for (int i = 0; i < 6; ++i)
    tasks.push_back({i, [&, i] {
                       ++ran;
                       if (i == 2) throw std::runtime_error("boom, twice");
                     }});
  tasks.push_back({6, nullptr});
  const auto log = run_parallel(std::move(tasks), 2);
  CHECK(ran.load() == 6);
  CHECK_FALSE(log.complete);
  CHECK(log.failures() == 2);
  CHECK(log.entries[2].error == "boom, twice");
  const auto text = format_run_log(log);
  const auto back = parse_run_log(text);
  CHECK(format_run_log(back) == text);
  CHECK_FALSE(back.complete);
  CHECK(back.entries[2].error == "boom; twice");
}

TEST_CASE("bad worker count") { CHECK_THROWS_AS(run_parallel(naps(1, 0), 0), Error); }

TEST_CASE("run_schedule: bins concurrent, tasks within a bin sequential") {
  Schedule s;
  s.bins = {{1}, {2, 3}};
  s.bin_loads = {0.1, 0.1};
  s.makespan = 0.1;
  std::map<std::int64_t, std::function<void()>> bodies{
      {1, [] { nap(0.08); }}, {2, [] { nap(0.04); }}, {3, [] { nap(0.04); }}};
  const auto log = run_schedule(s, bodies);
  CHECK(log.complete);
  CHECK(log.n_workers == 2);
  CHECK(log.wall_clock_s < 0.16 * 0.8);
  REQUIRE(log.entries.size() == 3);
  CHECK(log.entries[1].worker_id == 1);
  CHECK(log.entries[2].worker_id == 1);
  CHECK(log.entries[2].start_us >= log.entries[1].end_us);
  const auto per = log.worker_compute();
  CHECK(per.at(0) >= 0.08);
  CHECK(per.at(1) >= 0.08);
  check_invariants(log);
}

TEST_CASE("run_schedule: one bin is sequential, missing body fails") {
  Schedule s;
  s.bins = {{1, 2, 9}};
  s.bin_loads = {1};
  std::map<std::int64_t, std::function<void()>> bodies{{1, [] { nap(0.02); }}, {2, [] { nap(0.02); }}};
  const auto log = run_schedule(s, bodies, 0.01);
  CHECK(log.wall_clock_s >= 0.04 + 0.03);
  CHECK(log.failures() == 1);
  CHECK_FALSE(log.entries[2].ok);
}

TEST_CASE("run log parsing rejects junk") {
  CHECK_THROWS_AS(parse_run_log("nope\n"), Error);
  CHECK_THROWS_AS(parse_run_log("# n_workers=1\n"), Error);
  CHECK_THROWS_AS(parse_run_log("task_id,worker,wait_s,setup_s,compute_s,start_us,end_us,status\n1,2,3\n"), Error);
}
