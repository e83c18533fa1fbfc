#pragma once

// Reference computations for the test suites. Deliberately naive: exhaustive search,
// hand-rolled elimination, closed forms. They share no code paths with the library.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "htcflow/domain.hpp"
#include "htcflow/rbf.hpp"

namespace oracle {

using htc::Point3;

struct Partition {
  double makespan = 0.0;
  std::vector<int> assignment;  // bin per task
};

/// Exact k-way partition by enumerating all k^n assignments (ties: lexicographically
/// smallest assignment). Throws std::length_error beyond 1e7 assignments.
Partition optimal_partition(std::span<const double> loads, int k);

/// Dense Gaussian elimination with partial pivoting, no library involvement.
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b);

double gaussian_phi(double eps, double r);
double multiquadric_phi(double eps, double r);

/// 1 / mean nearest-neighbour distance, by all-pairs scan.
double mean_nn_shape(std::span<const Point3> points);

/// Max-norm interpolation error of `members` over one or more fields, with the RBF
/// built by solve_dense. eps <= 0 selects mean_nn_shape of the members.
double subset_error(std::span<const Point3> nodes, std::span<const std::size_t> members,
                    std::span<const std::vector<double>> fields, bool gaussian = true, double eps = 0.0);

struct SubsetOptimum {
  std::vector<std::size_t> members;
  double error = 0.0;
};
/// Recursive enumeration of every m-subset (lexicographic; ties keep the first).
/// Throws std::length_error beyond 1e4 subsets.
SubsetOptimum exhaustive_subset(std::span<const Point3> nodes, std::span<const std::vector<double>> fields,
                                std::size_t m);

std::uint64_t choose(std::uint64_t n, std::uint64_t k);

/// Lagrange interpolation through three (x, y) points.
double lagrange3(const std::array<std::pair<double, double>, 3>& pts, double x);

/// Closed-form HTC of an axis-aligned rectangular face in its local frame:
/// distance to the edge from the four side distances directly.
double rect_edge_distance(double x_local, double y_local, double width, double height);

/// Multilinear interpolation by summing all 2^4 corner weights (no zero skipping).
double multilinear(const std::array<std::vector<double>, 4>& knots, std::span<const double> values,
                   const std::array<double, 4>& x);

}  // namespace oracle
