#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "htcflow/balancer.hpp"
#include "htcflow/error.hpp"
#include "htcflow/rng.hpp"
#include "oracles.hpp"

using namespace htc;

namespace {

std::vector<Task> tasks_of(std::initializer_list<double> est) {
  std::vector<Task> out;
  std::int64_t id = 0;
  for (double e : est) out.push_back({id++, 1, e, {}});
  return out;
}

std::vector<double> loads_of(const std::vector<Task>& t) {
  std::vector<double> out;
  for (const auto& x : t) out.push_back(x.estimated_seconds);
  return out;
}

}  // namespace

TEST_CASE("runtime model: manufactured quadratic") {
  std::vector<std::pair<double, double>> s;
  for (double n : {100.0, 200.0, 400.0, 800.0}) s.emplace_back(n, 2 + 0.01 * n + 0.001 * n * n);
  const auto m = fit_runtime_model(s);
  CHECK(m.c0 == doctest::Approx(2).epsilon(1e-6));
  CHECK(m.c1 == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(m.c2 == doctest::Approx(0.001).epsilon(1e-6));
  CHECK(m.residuals.size() == 4);
  for (double r : m.residuals) CHECK(std::abs(r) < 1e-6);
  CHECK(estimate({2, 0.01, 0.001, {}, {}, 2}, 1000) == doctest::Approx(1012.0));
}

TEST_CASE("runtime model: square system interpolates") {
  const std::array<std::pair<double, double>, 3> p{{{10, 3.0}, {20, 1.0}, {45, 7.5}}};
  const auto m = fit_runtime_model(p);
  for (double x : {10.0, 20.0, 45.0, 30.0, 60.0})
    CHECK(estimate(m, x) == doctest::Approx(std::max(oracle::lagrange3(p, x), 1e-6)).epsilon(1e-9));
}

TEST_CASE("runtime model: constant data and clamping") {
  std::vector<std::pair<double, double>> s{{10, 5}, {20, 5}, {30, 5}, {40, 5}};
  const auto m = fit_runtime_model(s);
  CHECK(m.c0 == doctest::Approx(5).epsilon(1e-9));
  CHECK(std::abs(m.c1) < 1e-9);
  CHECK(std::abs(m.c2) < 1e-9);
  CHECK(estimate({-5, 0, 0, {}, {}, 2}, 10) == RuntimeModel::kMinSeconds);
}

TEST_CASE("runtime model: too few distinct abscissae") {
  std::vector<std::pair<double, double>> s{{10, 5}, {10, 6}, {20, 7}};
  try {
    fit_runtime_model(s);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::rank_deficient);
  }
  const auto r = fit_runtime_model_reduced(s);
  CHECK(r.degree == 1);
  CHECK(estimate(r, 10) == doctest::Approx(5.5));
  CHECK(estimate(r, 20) == doctest::Approx(7.0));
  std::vector<std::pair<double, double>> one{{10, 2}, {10, 4}};
  const auto c = fit_runtime_model_reduced(one);
  CHECK(c.degree == 0);
  CHECK(estimate(c, 99) == doctest::Approx(3.0));
}

TEST_CASE("pack: hand-traced LPT") {
  const auto t = tasks_of({5, 4, 3, 3});
  const auto s = pack(t, 2);
  CHECK(s.bins[0] == std::vector<std::int64_t>{0, 3});
  CHECK(s.bins[1] == std::vector<std::int64_t>{1, 2});
  CHECK(s.makespan == 8);
  const auto loads = loads_of(t);
  CHECK(oracle::optimal_partition(loads, 2).makespan == 8);
}

TEST_CASE("pack: one bin and dominant task") {
  const auto t = tasks_of({3, 1, 4, 1, 5});
  CHECK(pack(t, 1).makespan == 14);
  const auto d = tasks_of({1, 2, 30, 3, 4});
  for (std::size_t k = 2; k <= 5; ++k) {
    const auto s = pack(d, k);
    CHECK(s.makespan == 30);
    CHECK(s.bins[0] == std::vector<std::int64_t>{2});
  }
}

TEST_CASE("pack: ties go to the smaller id") {
  const auto t = tasks_of({2, 2, 2});
  const auto s = pack(t, 3);
  CHECK(s.bins[0] == std::vector<std::int64_t>{0});
  CHECK(s.bins[2] == std::vector<std::int64_t>{2});
}

TEST_CASE("pack: random sets against the exhaustive optimum") {
  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(9);
    const int k = 2 + static_cast<int>(rng.below(3));
    std::vector<Task> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back({static_cast<std::int64_t>(i), 1, 1 + 99 * rng.uniform01(), {}});
    const auto s = pack(t, static_cast<std::size_t>(k));
    const double opt = oracle::optimal_partition(loads_of(t), k).makespan;
    CHECK(s.makespan <= (4.0 / 3.0 - 1.0 / (3.0 * k)) * opt + 1e-9);
    std::size_t placed = 0;
    for (const auto& b : s.bins) placed += b.size();
    CHECK(placed == n);
  }
}

TEST_CASE("balance: dominant task and equal tasks") {
  const auto d = balance(tasks_of({10, 2, 2, 2}));
  CHECK(d.n_bins() == 2);
  CHECK(d.makespan == 10);
  for (std::size_t n : {1u, 2u, 4u, 7u}) {
    std::vector<Task> eq;
    for (std::size_t i = 0; i < n; ++i) eq.push_back({static_cast<std::int64_t>(i), 1, 3.0, {}});
    const auto s = balance(eq);
    CHECK(s.n_bins() == n);
    CHECK(s.makespan == 3.0);
  }
}

TEST_CASE("balance: trace is non-increasing and the result is the first minimum") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Task> t;
    const std::size_t n = 1 + rng.below(15);
    for (std::size_t i = 0; i < n; ++i) t.push_back({static_cast<std::int64_t>(i), 1, 1 + 99 * rng.uniform01(), {}});
    const auto tr = balance_traced(t);
    REQUIRE_FALSE(tr.makespans.empty());
    const double best = *std::min_element(tr.makespans.begin(), tr.makespans.end());
    CHECK(tr.schedule.makespan == best);
    const auto first = std::find(tr.makespans.begin(), tr.makespans.end(), best) - tr.makespans.begin();
    CHECK(tr.schedule.n_bins() == static_cast<std::size_t>(first + 1));
    double biggest = 0;
    for (const auto& x : t) biggest = std::max(biggest, x.estimated_seconds);
    CHECK(tr.schedule.makespan >= biggest - 1e-12);
  }
}

TEST_CASE("select_probes: smallest plus medium, never the largest") {
  std::vector<std::size_t> sizes{500, 40, 30, 80, 20, 60, 100, 10, 70, 90, 50, 5000};
  const auto p = select_probes(sizes, 0.25);
  CHECK(p.size() == 3);
  CHECK(std::find(p.begin(), p.end(), 11) == p.end());
  CHECK(std::find(p.begin(), p.end(), 7) != p.end());  // the smallest face
  CHECK(std::find(p.begin(), p.end(), 4) != p.end());  // the next smallest
  const std::vector<std::size_t> three{5, 6, 7};
  const auto q = select_probes(three, 0.25);
  CHECK(q.size() == 2);
  CHECK(std::find(q.begin(), q.end(), 2) == q.end());
}

TEST_CASE("measure_and_balance: quadratic probes give exact estimates") {
  const double c0 = 0.5, c1 = 0.01, c2 = 2e-5;
  auto cost = [&](std::size_t n) { return c0 + c1 * n + c2 * double(n) * double(n); };
  std::vector<FaceWork> faces;
  for (std::size_t i = 0; i < 12; ++i) faces.push_back({static_cast<FaceId>(i + 1), 50 + 37 * i});
  faces.push_back({99, 3000});
  const auto mb = measure_and_balance(faces, 0.25, [&](const FaceWork& f) { return cost(f.n_nodes); });
  REQUIRE(mb.model);
  CHECK(mb.probe_faces.size() >= 3);
  for (const auto& t : mb.tasks) CHECK(t.estimated_seconds == doctest::Approx(cost(t.n_nodes)).epsilon(1e-9));
  // the dominant face sits alone
  const auto it = std::find_if(mb.schedule.bins.begin(), mb.schedule.bins.end(), [](const auto& b) {
    return std::find(b.begin(), b.end(), 99) != b.end();
  });
  REQUIRE(it != mb.schedule.bins.end());
  CHECK(it->size() == 1);
}

TEST_CASE("measure_and_balance: fewer than 3 faces") {
  const std::vector<FaceWork> faces{{1, 10}, {2, 20}};
  int calls = 0;
  const auto mb = measure_and_balance(faces, 0.25, [&](const FaceWork&) {
    ++calls;
    return 1.0;
  });
  CHECK_FALSE(mb.model);
  CHECK(mb.schedule.n_bins() == 1);
  CHECK(calls == 0);
}

TEST_CASE("measure_and_balance: three equal faces") {
  const std::vector<FaceWork> faces{{1, 10}, {2, 10}, {3, 10}};
  const auto mb = measure_and_balance(faces, 0.25, [](const FaceWork&) { return 2.0; });
  CHECK(mb.schedule.n_bins() <= 3);
  for (const auto& t : mb.tasks) CHECK(t.estimated_seconds == doctest::Approx(2.0));
}

TEST_CASE("speedup arithmetic") {
  CHECK(speedup(5082, 2043) == doctest::Approx(2.4875).epsilon(1e-4));
  CHECK(speedup(177914, 177914.0 / 31) == doctest::Approx(31.0));
  CHECK_THROWS_AS(speedup(1, 0), Error);
}
