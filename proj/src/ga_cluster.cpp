#include "htcflow/ga_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "htcflow/error.hpp"
#include "htcflow/rng.hpp"

namespace htc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_fields(const Face& face, std::span<const HTCField> fields) {
  if (fields.empty()) throw Error(Errc::invalid_argument, "clustering needs at least one HTC field");
  for (const auto& f : fields) {
    if (f.face_id != face.face_id() || f.values.size() != face.size()) {
      throw Error(Errc::node_count_mismatch, "HTC field (face " + std::to_string(f.face_id) + ", case " +
                                                 std::to_string(f.case_id) + ") does not match face " +
                                                 std::to_string(face.face_id()));
    }
  }
}

}  // namespace

void NodeSubset::validate(std::size_t n_nodes) const {
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i] >= n_nodes) {
      throw Error(Errc::invalid_argument, "subset member " + std::to_string(members[i]) + " out of range");
    }
    if (i > 0 && members[i] <= members[i - 1]) {
      throw Error(Errc::invalid_argument, "subset members must be sorted and distinct");
    }
  }
}

void GAParams::validate() const {
  if (population_size < 2) throw Error(Errc::invalid_argument, "GA: population_size must be >= 2");
  if (generations < 1) throw Error(Errc::invalid_argument, "GA: generations must be >= 1");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) {
    throw Error(Errc::invalid_argument, "GA: crossover_prob must lie in [0, 1]");
  }
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
    throw Error(Errc::invalid_argument, "GA: mutation_prob must lie in [0, 1]");
  }
  if (tournament_size < 2) throw Error(Errc::invalid_argument, "GA: tournament_size must be >= 2");
  if (elitism_count < 0 || elitism_count >= population_size) {
    throw Error(Errc::invalid_argument, "GA: elitism_count must lie in [0, population_size)");
  }
}

double fitness(std::span<const std::size_t> members, const Face& face, std::span<const HTCField> fields,
               const FitnessOptions& options) {
  const auto m = static_cast<Eigen::Index>(members.size());
  if (m == 0) return kInf;
  std::vector<Point3> centers;
  centers.reserve(members.size());
  for (auto idx : members) centers.push_back(face.node(idx).position);
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      if ((centers[i] - centers[j]).norm() <= 1e-12) return kInf;

  const double eps = options.shape_eps.value_or(rbf::default_shape(centers));
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = rbf::phi(options.kernel, eps, (centers[i] - centers[j]).norm());
      a(i, j) = v;
      a(j, i) = v;
    }
  a.diagonal().array() += options.ridge;

  const auto n_fields = static_cast<Eigen::Index>(fields.size());
  Eigen::MatrixXd w(m, n_fields);
  for (Eigen::Index f = 0; f < n_fields; ++f)
    for (Eigen::Index i = 0; i < m; ++i) w(i, f) = fields[f].values.at(members[static_cast<std::size_t>(i)]);

  // One factorisation serves every field: the system matrix depends on the subset only.
  Eigen::MatrixXd c;
  bool solved = false;
  if (options.kernel == rbf::Kernel::gaussian) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success && llt.rcond() > 0.0) {
      c = llt.solve(w);
      solved = c.allFinite();
    }
  }
  if (!solved) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    if (!(lu.rcond() > 0.0)) return kInf;
    c = lu.solve(w);
    if (!c.allFinite()) return kInf;
  }

  double worst = 0.0;
  Eigen::RowVectorXd k(m);
  for (std::size_t node = 0; node < face.size(); ++node) {
    const Point3& x = face.node(node).position;
    for (Eigen::Index j = 0; j < m; ++j) k[j] = rbf::phi(options.kernel, eps, (x - centers[j]).norm());
    const Eigen::RowVectorXd s = k * c;
    for (Eigen::Index f = 0; f < n_fields; ++f) {
      const double err = std::abs(s[f] - fields[f].values[node]);
      if (!(err <= worst)) worst = err;  // NaN propagates as +inf below
    }
  }
  return std::isfinite(worst) ? worst : kInf;
}

double fitness(const NodeSubset& subset, const Face& face, std::span<const HTCField> fields,
               const FitnessOptions& options) {
  subset.validate(face.size());
  return fitness(subset.members, face, fields, options);
}

namespace {

using Genome = std::vector<std::size_t>;

struct Individual {
  Genome genes;
  double fitness = kInf;
};

bool better(const Individual& a, const Individual& b) {
  if (a.fitness != b.fitness) return a.fitness < b.fitness;
  return a.genes < b.genes;
}

class Search {
 public:
  Search(const Face& face, std::span<const HTCField> fields, std::size_t m, const GAParams& params,
         const GASearchOptions& options)
      : face_(face), fields_(fields), m_(m), params_(params), options_(options), rng_(params.rng_seed) {
    pool_ = options.pool;
    if (pool_.empty()) {
      pool_.resize(face.size());
      std::iota(pool_.begin(), pool_.end(), std::size_t{0});
    }
    std::sort(pool_.begin(), pool_.end());
    pool_.erase(std::unique(pool_.begin(), pool_.end()), pool_.end());
    for (auto p : pool_) {
      if (p >= face.size()) throw Error(Errc::invalid_argument, "GA pool index out of range");
    }
    if (m_ < 1 || m_ > pool_.size()) {
      throw Error(Errc::invalid_argument, "GA: m = " + std::to_string(m_) + " must lie in [1, " +
                                              std::to_string(pool_.size()) + "]");
    }
  }

  GATrace run() {
    GATrace trace;
    if (m_ == pool_.size()) {
      const double f = evaluate(pool_);
      trace.best = {face_.face_id(), pool_, f};
      trace.best_history.assign(static_cast<std::size_t>(params_.generations) + 1, f);
      trace.evaluations = evaluations_;
      return trace;
    }

    const auto pop_size = static_cast<std::size_t>(params_.population_size);
    std::vector<Individual> population;
    population.reserve(pop_size);
    for (const auto& seed : options_.seeds) {
      if (population.size() == pop_size) break;
      population.push_back(make(repair(seed)));
    }
    while (population.size() < pop_size) population.push_back(make(random_genome()));

    Individual best = *std::min_element(population.begin(), population.end(), better);
    trace.best_history.push_back(best.fitness);

    std::vector<Individual> next;
    next.reserve(pop_size);
    for (int gen = 0; gen < params_.generations; ++gen) {
      next.clear();
      std::vector<std::size_t> order(population.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      const auto n_elite = static_cast<std::size_t>(params_.elitism_count);
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_elite), order.end(),
                        [&](std::size_t a, std::size_t b) { return better(population[a], population[b]); });
      for (std::size_t e = 0; e < n_elite; ++e) next.push_back(population[order[e]]);

      std::set<Genome> present;
      for (const auto& ind : next) present.insert(ind.genes);
      while (next.size() < pop_size) {
        const Individual& p1 = population[tournament(population)];
        const Individual& p2 = population[tournament(population)];
        Genome child = rng_.bernoulli(params_.crossover_prob) ? crossover(p1.genes, p2.genes) : p1.genes;
        mutate(child);
        // A clone of an individual already in the next generation gets one forced gene swap;
        // without it small pools collapse onto a single subset within a few generations.
        for (int attempt = 0; attempt < kCloneRetries && present.count(child); ++attempt) force_mutation(child);
        present.insert(child);
        next.push_back(make(std::move(child)));
      }
      population.swap(next);
      for (const auto& ind : population)
        if (better(ind, best)) best = ind;
      trace.best_history.push_back(best.fitness);
    }
    trace.best = {face_.face_id(), best.genes, best.fitness};
    trace.evaluations = evaluations_;
    return trace;
  }

 private:
  double evaluate(const Genome& genes) {
    auto it = cache_.find(genes);
    if (it != cache_.end()) return it->second;
    ++evaluations_;
    const double f = fitness(genes, face_, fields_, options_.fitness);
    cache_.emplace(genes, f);
    return f;
  }

  Individual make(Genome genes) {
    const double f = evaluate(genes);
    return {std::move(genes), f};
  }

  Genome random_genome() {
    Genome scratch = pool_;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(scratch.size() - i));
      std::swap(scratch[i], scratch[j]);
    }
    scratch.resize(m_);
    std::sort(scratch.begin(), scratch.end());
    return scratch;
  }

  // Keeps pool members, drops duplicates, then tops up with random unused pool nodes.
  Genome repair(const Genome& raw) {
    Genome genes;
    for (auto g : raw)
      if (std::binary_search(pool_.begin(), pool_.end(), g)) genes.push_back(g);
    std::sort(genes.begin(), genes.end());
    genes.erase(std::unique(genes.begin(), genes.end()), genes.end());
    while (genes.size() > m_) genes.erase(genes.begin() + static_cast<std::ptrdiff_t>(rng_.below(genes.size())));
    while (genes.size() < m_) {
      const auto candidate = pool_[rng_.below(pool_.size())];
      if (!std::binary_search(genes.begin(), genes.end(), candidate)) {
        genes.insert(std::upper_bound(genes.begin(), genes.end(), candidate), candidate);
      }
    }
    return genes;
  }

  std::size_t tournament(const std::vector<Individual>& population) {
    std::size_t winner = rng_.below(population.size());
    for (int k = 1; k < params_.tournament_size; ++k) {
      const auto challenger = static_cast<std::size_t>(rng_.below(population.size()));
      if (better(population[challenger], population[winner])) winner = challenger;
    }
    return winner;
  }

  // Uniform set crossover: the union of both parents, thinned at random to m genes.
  Genome crossover(const Genome& a, const Genome& b) {
    Genome merged;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
    for (std::size_t i = 0; i < m_; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(merged.size() - i));
      std::swap(merged[i], merged[j]);
    }
    merged.resize(m_);
    std::sort(merged.begin(), merged.end());
    return merged;
  }

  void mutate(Genome& genes) {
    const std::size_t unused = pool_.size() - genes.size();
    if (unused == 0) return;
    bool changed = false;
    for (std::size_t i = 0; i < genes.size(); ++i) {
      if (!rng_.bernoulli(params_.mutation_prob)) continue;
      // k-th pool node not currently in the genome
      auto k = static_cast<std::size_t>(rng_.below(unused));
      for (auto p : pool_) {
        if (std::find(genes.begin(), genes.end(), p) != genes.end()) continue;
        if (k-- == 0) {
          genes[i] = p;
          changed = true;
          break;
        }
      }
    }
    if (changed) std::sort(genes.begin(), genes.end());
  }

  void force_mutation(Genome& genes) {
    const std::size_t unused = pool_.size() - genes.size();
    if (unused == 0) return;
    const auto i = static_cast<std::size_t>(rng_.below(genes.size()));
    auto k = static_cast<std::size_t>(rng_.below(unused));
    for (auto p : pool_) {
      if (std::binary_search(genes.begin(), genes.end(), p)) continue;
      if (k-- == 0) {
        genes[i] = p;
        break;
      }
    }
    std::sort(genes.begin(), genes.end());
  }

  static constexpr int kCloneRetries = 4;

  const Face& face_;
  std::span<const HTCField> fields_;
  std::size_t m_;
  const GAParams& params_;
  const GASearchOptions& options_;
  Rng rng_;
  Genome pool_;
  std::map<Genome, double> cache_;
  std::size_t evaluations_ = 0;
};

}  // namespace

GATrace ga_search_traced(const Face& face, std::span<const HTCField> fields, std::size_t m, const GAParams& params,
                         const GASearchOptions& options) {
  params.validate();
  check_fields(face, fields);
  if (m > face.size()) {
    throw Error(Errc::invalid_argument, "GA: m = " + std::to_string(m) + " exceeds the face's " +
                                            std::to_string(face.size()) + " nodes");
  }
  Search search(face, fields, m, params, options);
  return search.run();
}

NodeSubset ga_search(const Face& face, std::span<const HTCField> fields, std::size_t m, const GAParams& params,
                     const FitnessOptions& options) {
  GASearchOptions search_options;
  search_options.fitness = options;
  return ga_search_traced(face, fields, m, params, search_options).best;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) return 0;
  k = std::min(k, n - k);
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) is divisible by i; split the division so the product cannot wrap.
    const std::uint64_t g = std::gcd(r, i);
    const std::uint64_t t = (n - k + i) / (i / g);
    r /= g;
    if (r > kMax / t) return kMax;
    r *= t;
  }
  return r;
}

NodeSubset brute_force_subset(const Face& face, std::span<const HTCField> fields, std::size_t m,
                              const FitnessOptions& options) {
  check_fields(face, fields);
  const std::size_t n = face.size();
  if (m < 1 || m > n) throw Error(Errc::invalid_argument, "brute_force_subset: m out of range");
  if (binomial(n, m) > kBruteForceBudget) {
    throw Error(Errc::budget_exceeded, "brute_force_subset: C(" + std::to_string(n) + ", " + std::to_string(m) +
                                           ") exceeds the enumeration budget");
  }
  std::vector<std::size_t> combo(m);
  std::iota(combo.begin(), combo.end(), std::size_t{0});
  NodeSubset best{face.face_id(), combo, kInf};
  for (;;) {
    const double f = fitness(combo, face, fields, options);
    if (f < *best.fitness) best = {face.face_id(), combo, f};
    // advance to the next combination in lexicographic order
    std::size_t i = m;
    while (i > 0 && combo[i - 1] == n - m + i - 1) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < m; ++j) combo[j] = combo[j - 1] + 1;
  }
  return best;
}

TwoStageResult two_stage_cluster(const Face& face, std::span<const HTCField> fields_by_case, std::size_t m,
                                 const GAParams& params, const FitnessOptions& options) {
  params.validate();
  check_fields(face, fields_by_case);
  if (m < 1 || m > face.size()) throw Error(Errc::invalid_argument, "two_stage_cluster: m out of range");

  TwoStageResult result;
  result.stage1.reserve(fields_by_case.size());
  for (std::size_t c = 0; c < fields_by_case.size(); ++c) {
    GAParams stage_params = params;
    stage_params.rng_seed = derive_seed(params.rng_seed, c + 1);
    GASearchOptions opts;
    opts.fitness = options;
    result.stage1.push_back(ga_search_traced(face, fields_by_case.subspan(c, 1), m, stage_params, opts).best);
  }

  for (const auto& s : result.stage1) result.pool.insert(result.pool.end(), s.members.begin(), s.members.end());
  std::sort(result.pool.begin(), result.pool.end());
  result.pool.erase(std::unique(result.pool.begin(), result.pool.end()), result.pool.end());

  if (result.pool.size() > m) {
    GAParams stage_params = params;
    stage_params.rng_seed = derive_seed(params.rng_seed, 0);
    GASearchOptions opts;
    opts.fitness = options;
    opts.pool = result.pool;
    for (const auto& s : result.stage1) opts.seeds.push_back(s.members);
    result.final_subset = ga_search_traced(face, fields_by_case, m, stage_params, opts).best;
    return result;
  }

  // Pool too small (or exact): pad greedily with the node that most reduces the all-case error.
  std::vector<std::size_t> members = result.pool;
  while (members.size() < m) {
    double best_f = kInf;
    std::size_t best_node = face.size();
    for (std::size_t node = 0; node < face.size(); ++node) {
      if (std::binary_search(members.begin(), members.end(), node)) continue;
      auto trial = members;
      trial.insert(std::upper_bound(trial.begin(), trial.end(), node), node);
      const double f = fitness(trial, face, fields_by_case, options);
      if (f < best_f || best_node == face.size()) {
        best_f = f;
        best_node = node;
      }
    }
    members.insert(std::upper_bound(members.begin(), members.end(), best_node), best_node);
  }
  result.final_subset = {face.face_id(), members, fitness(members, face, fields_by_case, options)};
  return result;
}

}  // namespace htc
