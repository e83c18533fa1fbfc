#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "htcflow/domain.hpp"
#include "htcflow/rbf.hpp"

namespace htc {

/// A fixed-size set of node indices into Face::nodes(), sorted ascending.
struct NodeSubset {
  FaceId face_id = 0;
  std::vector<std::size_t> members;
  std::optional<double> fitness;  // W/(m^2 K)

  std::size_t m() const noexcept { return members.size(); }
  void validate(std::size_t n_nodes) const;
  bool operator==(const NodeSubset&) const = default;
};

struct GAParams {
  int population_size = 50;
  int generations = 200;
  double crossover_prob = 0.9;
  double mutation_prob = 0.05;
  int tournament_size = 2;
  int elitism_count = 1;
  std::uint64_t rng_seed = 0;

  void validate() const;
  bool operator==(const GAParams&) const = default;
};

/// RBF settings used inside the fitness. Ridge 0 keeps the interpolation exact, so a
/// full subset scores zero.
struct FitnessOptions {
  rbf::Kernel kernel = rbf::Kernel::gaussian;
  std::optional<double> shape_eps;  // nullopt: default_shape of the subset's nodes
  double ridge = 0.0;

  rbf::FitOptions fit_options() const { return {kernel, shape_eps, ridge}; }
};

/// max over fields of max_i |f_S(x_i) - w_i|, f_S the RBF interpolant on the subset's
/// nodes. Returns +infinity when the RBF system cannot be solved.
double fitness(std::span<const std::size_t> members, const Face& face, std::span<const HTCField> fields,
               const FitnessOptions& options = {});
double fitness(const NodeSubset& subset, const Face& face, std::span<const HTCField> fields,
               const FitnessOptions& options = {});

struct GATrace {
  NodeSubset best;
  /// Best-ever fitness after the initial population (index 0) and after each generation.
  std::vector<double> best_history;
  std::size_t evaluations = 0;
};

struct GASearchOptions {
  FitnessOptions fitness;
  /// Candidate node indices; empty means every node of the face.
  std::vector<std::size_t> pool;
  /// Individuals injected into the initial population (repaired to the pool and size m).
  std::vector<std::vector<std::size_t>> seeds;
};

GATrace ga_search_traced(const Face& face, std::span<const HTCField> fields, std::size_t m, const GAParams& params,
                         const GASearchOptions& options = {});

NodeSubset ga_search(const Face& face, std::span<const HTCField> fields, std::size_t m, const GAParams& params,
                     const FitnessOptions& options = {});

/// Exact minimiser over all C(N, m) subsets, ties to the lexicographically smallest.
/// Throws Error{budget_exceeded} when C(N, m) > kBruteForceBudget.
constexpr std::uint64_t kBruteForceBudget = 1'000'000;
NodeSubset brute_force_subset(const Face& face, std::span<const HTCField> fields, std::size_t m,
                              const FitnessOptions& options = {});

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept;

struct TwoStageResult {
  NodeSubset final_subset;          // fitness evaluated over all cases
  std::vector<NodeSubset> stage1;   // one per case, fitness over that case only
  std::vector<std::size_t> pool;    // union of the stage-1 members
};

/// Stage 1 searches each load case on its own; stage 2 searches the union of the
/// stage-1 subsets against every case at once.
TwoStageResult two_stage_cluster(const Face& face, std::span<const HTCField> fields_by_case, std::size_t m,
                                 const GAParams& params, const FitnessOptions& options = {});

}  // namespace htc
