#include <doctest.h>

#include <cmath>

#include "oracles.hpp"

// The oracles themselves, on cases small enough to check by hand.

TEST_CASE("optimal_partition") {
  const std::vector<double> a{5, 4, 3, 3};
  CHECK(oracle::optimal_partition(a, 2).makespan == 8);
  const std::vector<double> b{3, 3, 2, 2, 2};
  CHECK(oracle::optimal_partition(b, 2).makespan == 6);
  CHECK(oracle::optimal_partition(b, 1).makespan == 12);
  const std::vector<double> none;
  CHECK(oracle::optimal_partition(none, 3).makespan == 0);
  const std::vector<double> big(15, 1.0);
  CHECK_THROWS(oracle::optimal_partition(big, 4));
}

TEST_CASE("solve_dense") {
  const auto x = oracle::solve_dense({{0, 2}, {3, 1}}, {4, 5});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));
  CHECK_THROWS(oracle::solve_dense({{1, 1}, {1, 1}}, {1, 2}));
}

TEST_CASE("choose and lagrange") {
  CHECK(oracle::choose(5, 2) == 10);
  CHECK(oracle::choose(12, 4) == 495);
  const std::array<std::pair<double, double>, 3> p{{{0, 1}, {1, 2}, {2, 5}}};  // x^2 + 1
  CHECK(oracle::lagrange3(p, 3) == doctest::Approx(10));
}

TEST_CASE("subset_error by hand") {
  const std::vector<htc::Point3> nodes{{0, 0, 0}, {1, 0, 0}};
  const std::vector<std::vector<double>> f{{4, 4}};
  const std::vector<std::size_t> s{0};
  CHECK(oracle::subset_error(nodes, s, f) == doctest::Approx(4 * (1 - std::exp(-1.0))));
}

TEST_CASE("multilinear reference with collapsed axes") {
  const std::array<std::vector<double>, 4> k{std::vector<double>{0, 1}, std::vector<double>{0, 1},
                                             std::vector<double>{0}, std::vector<double>{0}};
  const std::vector<double> v{0, 1, 2, 3};  // value = 2t + v
  CHECK(oracle::multilinear(k, v, {0.25, 0.5, 7, 7}) == doctest::Approx(1.0));
}
