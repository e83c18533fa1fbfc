#include "htcflow/balancer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "htcflow/error.hpp"

namespace htc {

namespace {

RuntimeModel least_squares(std::span<const std::pair<double, double>> samples, int degree) {
  double scale = 0.0;
  for (const auto& s : samples) scale = std::max(scale, std::abs(s.first));
  if (!(scale > 0.0)) scale = 1.0;
  const auto rows = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd v(rows, degree + 1);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x = samples[static_cast<std::size_t>(i)].first / scale;
    double p = 1.0;
    for (int d = 0; d <= degree; ++d, p *= x) v(i, d) = p;
    y[i] = samples[static_cast<std::size_t>(i)].second;
  }
  const Eigen::VectorXd c = v.colPivHouseholderQr().solve(y);
  RuntimeModel model;
  model.degree = degree;
  model.c0 = c[0];
  model.c1 = degree >= 1 ? c[1] / scale : 0.0;
  model.c2 = degree >= 2 ? c[2] / (scale * scale) : 0.0;
  model.sample_points.assign(samples.begin(), samples.end());
  for (const auto& s : samples) {
    model.residuals.push_back(s.second - (model.c0 + model.c1 * s.first + model.c2 * s.first * s.first));
  }
  return model;
}

std::size_t distinct_abscissae(std::span<const std::pair<double, double>> samples) {
  std::set<double> xs;
  for (const auto& s : samples) {
    if (!std::isfinite(s.first) || !std::isfinite(s.second)) {
      throw Error(Errc::non_finite_value, "runtime model: non-finite sample");
    }
    xs.insert(s.first);
  }
  return xs.size();
}

}  // namespace

RuntimeModel fit_runtime_model(std::span<const std::pair<double, double>> samples) {
  if (distinct_abscissae(samples) < 3) {
    throw Error(Errc::rank_deficient, "runtime model: a quadratic fit needs at least 3 distinct node counts");
  }
  return least_squares(samples, 2);
}

RuntimeModel fit_runtime_model_reduced(std::span<const std::pair<double, double>> samples) {
  const std::size_t distinct = distinct_abscissae(samples);
  if (distinct == 0) throw Error(Errc::invalid_argument, "runtime model: no samples");
  return least_squares(samples, static_cast<int>(std::min<std::size_t>(distinct, 3)) - 1);
}

double estimate(const RuntimeModel& model, double n_nodes) {
  return std::max(model.c0 + model.c1 * n_nodes + model.c2 * n_nodes * n_nodes, RuntimeModel::kMinSeconds);
}

Schedule pack(std::span<const Task> tasks, std::size_t n_bins) {
  if (n_bins < 1) throw Error(Errc::invalid_argument, "pack: n_bins must be >= 1");
  if (tasks.empty()) throw Error(Errc::invalid_argument, "pack: no tasks");
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (tasks[a].estimated_seconds != tasks[b].estimated_seconds) {
      return tasks[a].estimated_seconds > tasks[b].estimated_seconds;
    }
    return tasks[a].task_id < tasks[b].task_id;
  });
  Schedule s;
  s.bins.resize(n_bins);
  s.bin_loads.assign(n_bins, 0.0);
  for (auto t : order) {
    const auto lightest = static_cast<std::size_t>(
        std::min_element(s.bin_loads.begin(), s.bin_loads.end()) - s.bin_loads.begin());
    s.bins[lightest].push_back(tasks[t].task_id);
    s.bin_loads[lightest] += tasks[t].estimated_seconds;
  }
  s.makespan = *std::max_element(s.bin_loads.begin(), s.bin_loads.end());
  return s;
}

BalanceTrace balance_traced(std::span<const Task> tasks) {
  if (tasks.empty()) throw Error(Errc::invalid_argument, "balance: no tasks");
  double lower_bound = 0.0;
  for (const auto& t : tasks) lower_bound = std::max(lower_bound, t.estimated_seconds);

  // Plateaus do not stop the search (n equal tasks keep a constant makespan over several
  // bin counts before dropping); an increase or reaching the largest task does.
  BalanceTrace trace;
  trace.schedule = pack(tasks, 1);
  trace.makespans.push_back(trace.schedule.makespan);
  double current = trace.schedule.makespan;
  for (std::size_t k = 1; k < tasks.size(); ++k) {
    if (current <= lower_bound + kBalanceTolerance) break;
    Schedule next = pack(tasks, k + 1);
    trace.makespans.push_back(next.makespan);
    if (next.makespan > current + kBalanceTolerance) break;
    current = next.makespan;
    if (next.makespan < trace.schedule.makespan - kBalanceTolerance) trace.schedule = std::move(next);
  }
  return trace;
}

Schedule balance(std::span<const Task> tasks) { return balance_traced(tasks).schedule; }

std::vector<std::size_t> select_probes(std::span<const std::size_t> sizes, double probe_fraction) {
  const std::size_t n = sizes.size();
  if (n < 2) return {};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sizes[a] < sizes[b]; });
  const std::size_t candidates = n - 1;  // the largest face is never probed
  const auto wanted = static_cast<std::size_t>(std::ceil(std::max(probe_fraction, 0.0) * static_cast<double>(n)));
  const std::size_t count = std::min(std::max<std::size_t>(3, wanted), candidates);
  const std::size_t n_small = count - count / 2;
  std::vector<std::size_t> picks(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_small));
  const std::size_t n_medium = count - n_small;
  const std::size_t rest = candidates - n_small;
  for (std::size_t j = 0; j < n_medium; ++j) {
    picks.push_back(order[n_small + (j + 1) * rest / (n_medium + 1)]);
  }
  std::sort(picks.begin(), picks.end());
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  return picks;
}

MeasuredBalance measure_and_balance(std::span<const FaceWork> faces, double probe_fraction,
                                    const std::function<double(const FaceWork&)>& run_probe) {
  if (faces.empty()) throw Error(Errc::invalid_argument, "measure_and_balance: no faces");
  MeasuredBalance out;
  if (faces.size() < 3) {
    Schedule s;
    s.bins.emplace_back();
    for (const auto& f : faces) {
      s.bins[0].push_back(f.face_id);
      out.tasks.push_back({f.face_id, f.n_nodes, 1.0, std::nullopt});
    }
    s.bin_loads.push_back(static_cast<double>(faces.size()));
    s.makespan = s.bin_loads[0];
    out.schedule = std::move(s);
    return out;
  }

  std::vector<std::size_t> sizes;
  for (const auto& f : faces) sizes.push_back(f.n_nodes);
  const auto probes = select_probes(sizes, probe_fraction);
  std::vector<std::optional<double>> measured(faces.size());
  std::vector<std::pair<double, double>> samples;
  for (auto p : probes) {
    const double seconds = run_probe(faces[p]);
    measured[p] = seconds;
    samples.emplace_back(static_cast<double>(faces[p].n_nodes), seconds);
    out.probe_faces.push_back(faces[p].face_id);
  }
  out.model = fit_runtime_model_reduced(samples);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    Task t{faces[i].face_id, faces[i].n_nodes, estimate(*out.model, static_cast<double>(faces[i].n_nodes)),
           measured[i]};
    if (measured[i]) t.estimated_seconds = std::max(*measured[i], RuntimeModel::kMinSeconds);
    out.tasks.push_back(t);
  }
  out.schedule = balance(out.tasks);
  return out;
}

double speedup(double sequential_seconds, double parallel_seconds) {
  if (!(parallel_seconds > 0.0)) throw Error(Errc::invalid_argument, "speedup: parallel time must be > 0");
  return sequential_seconds / parallel_seconds;
}

}  // namespace htc
