#include "htcflow/cdiag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "htcflow/error.hpp"
#include "htcflow/surrogate.hpp"

namespace htc {

namespace {

constexpr std::array<const char*, 4> kAxisNames{"t_air", "v", "az", "el"};

std::array<double, 4> coordinates(const LoadCase& c) { return {c.t_air, c.v, c.az, c.el}; }

struct Stencil {
  std::array<std::size_t, 4> base{};
  std::array<double, 4> weight{};  // weight of the upper knot on each active axis
  bool clamped = false;
};

Stencil locate(const CDAxes& axes, const LoadCase& c) {
  Stencil s;
  const auto x = coordinates(c);
  for (std::size_t a = 0; a < 4; ++a) {
    const auto& k = axes.knots[a];
    double xa = x[a];
    if (xa < k.front() || xa > k.back() || !std::isfinite(xa)) {
      s.clamped = true;
      xa = std::isfinite(xa) ? std::clamp(xa, k.front(), k.back()) : k.front();
    }
    if (k.size() == 1) continue;
    auto cell = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), xa) - k.begin());
    cell = std::clamp<std::size_t>(cell, 1, k.size() - 1) - 1;
    s.base[a] = cell;
    s.weight[a] = (xa - k[cell]) / (k[cell + 1] - k[cell]);
  }
  return s;
}

/// Visits the (flat index, weight) pairs of the nonzero multilinear weights.
template <typename F>
void for_each_corner(const CDAxes& axes, const Stencil& s, F&& visit) {
  std::array<std::size_t, 4> dims{};
  for (std::size_t a = 0; a < 4; ++a) dims[a] = axes.knots[a].size();
  for (unsigned mask = 0; mask < 16; ++mask) {
    double w = 1.0;
    std::array<std::size_t, 4> idx = s.base;
    bool skip = false;
    for (std::size_t a = 0; a < 4; ++a) {
      const bool upper = (mask >> a) & 1u;
      if (dims[a] == 1) {
        if (upper) skip = true;
        continue;
      }
      const double wa = upper ? s.weight[a] : 1.0 - s.weight[a];
      if (wa == 0.0) {
        skip = true;
        break;
      }
      w *= wa;
      idx[a] += upper ? 1 : 0;
    }
    if (skip) continue;
    const std::size_t flat = ((idx[0] * dims[1] + idx[1]) * dims[2] + idx[2]) * dims[3] + idx[3];
    visit(flat, w);
  }
}

std::string cell_name(const CDAxes& axes, std::size_t flat) {
  std::array<std::size_t, 4> idx{};
  for (std::size_t a = 4; a-- > 0;) {
    idx[a] = flat % axes.knots[a].size();
    flat /= axes.knots[a].size();
  }
  std::string out = "(";
  for (std::size_t a = 0; a < 4; ++a) {
    if (a) out += ", ";
    out += kAxisNames[a];
    out += '=';
    out += format_double17(axes.knots[a][idx[a]]);
  }
  return out + ")";
}

}  // namespace

void CDAxes::validate() const {
  for (std::size_t a = 0; a < 4; ++a) {
    const auto& k = knots[a];
    if (k.empty()) throw Error(Errc::invalid_argument, std::string("CD axis ") + kAxisNames[a] + " has no knots");
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (!std::isfinite(k[i])) throw Error(Errc::non_finite_value, "CD axis knots must be finite");
      if (i > 0 && !(k[i] > k[i - 1])) {
        throw Error(Errc::invalid_argument, std::string("CD axis ") + kAxisNames[a] + " is not strictly increasing");
      }
    }
  }
}

std::size_t CDAxes::size() const {
  std::size_t n = 1;
  for (const auto& k : knots) n *= k.size();
  return n;
}

CDAxes CDAxes::from_grid(const CaseGrid& grid) {
  return CDAxes{{grid.t_values, grid.v_values, grid.az_values, grid.el_values}};
}

CDGrid::CDGrid(CDAxes axes, std::vector<double> support_values, double smoothing_lambda, CDOwner owner)
    : axes_(std::move(axes)), values_(std::move(support_values)), lambda_(smoothing_lambda), owner_(owner) {
  axes_.validate();
  if (values_.size() != axes_.size()) {
    throw Error(Errc::invalid_argument, "CD grid has " + std::to_string(values_.size()) + " support values, axes need " +
                                            std::to_string(axes_.size()));
  }
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(Errc::non_finite_value, "CD support values must be finite");
  if (!(lambda_ >= 0.0)) throw Error(Errc::invalid_argument, "CD smoothing lambda must be >= 0");
}

std::size_t CDGrid::flat_index(const std::array<std::size_t, 4>& index) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < 4; ++a) {
    if (index[a] >= axes_.knots[a].size()) throw Error(Errc::invalid_argument, "CD grid index out of range");
    flat = flat * axes_.knots[a].size() + index[a];
  }
  return flat;
}

CDQuery query(const CDGrid& grid, const LoadCase& load_case) {
  const Stencil s = locate(grid.axes(), load_case);
  CDQuery q{0.0, s.clamped};
  const auto& values = grid.support_values();
  for_each_corner(grid.axes(), s, [&](std::size_t flat, double w) { q.value += w * values[flat]; });
  return q;
}

CDGrid train_cd(std::span<const CDSample> samples, const CDAxes& axes, double smoothing_lambda, CDOwner owner,
                CDTrainReport* report) {
  axes.validate();
  if (samples.empty()) throw Error(Errc::invalid_argument, "train_cd: no samples");
  if (!(smoothing_lambda >= 0.0) || !std::isfinite(smoothing_lambda)) {
    throw Error(Errc::invalid_argument, "train_cd: smoothing lambda must be finite and >= 0");
  }
  const std::size_t n = axes.size();
  const auto en = static_cast<Eigen::Index>(n);
  std::array<std::size_t, 4> dims{};
  for (std::size_t a = 0; a < 4; ++a) dims[a] = axes.knots[a].size();

  CDTrainReport local_report;
  std::vector<Eigen::Triplet<double>> a_entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(en);
  std::vector<Stencil> stencils;
  stencils.reserve(samples.size());
  std::vector<bool> touched(n, false);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].alpha)) throw Error(Errc::non_finite_value, "train_cd: non-finite sample value");
    stencils.push_back(locate(axes, samples[i].load_case));
    if (stencils.back().clamped) ++local_report.clamped_samples;
    for_each_corner(axes, stencils.back(), [&](std::size_t flat, double w) {
      a_entries.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(flat), w);
      touched[flat] = true;
    });
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(samples.size()), en);
  a.setFromTriplets(a_entries.begin(), a_entries.end());
  Eigen::VectorXd alpha(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) alpha[static_cast<Eigen::Index>(i)] = samples[i].alpha;

  if (smoothing_lambda == 0.0) {
    std::vector<std::string> free_cells;
    for (std::size_t f = 0; f < n; ++f)
      if (!touched[f]) free_cells.push_back(cell_name(axes, f));
    if (!free_cells.empty()) {
      std::string msg = "train_cd: " + std::to_string(free_cells.size()) + " unconstrained support point(s) with lambda=0:";
      for (std::size_t k = 0; k < std::min<std::size_t>(free_cells.size(), 8); ++k) msg += " " + free_cells[k];
      if (free_cells.size() > 8) msg += " ...";
      throw Error(Errc::rank_deficient, msg);
    }
  }

  std::vector<Eigen::Triplet<double>> d_entries;
  Eigen::Index row = 0;
  for (std::size_t axis = 0; axis < 4; ++axis) {
    const auto& k = axes.knots[axis];
    if (k.size() < 3) continue;
    const double mean_h = (k.back() - k.front()) / static_cast<double>(k.size() - 1);
    std::array<std::size_t, 4> stride{};
    stride[3] = 1;
    for (std::size_t b = 3; b-- > 0;) stride[b] = stride[b + 1] * dims[b + 1];
    for (std::size_t flat = 0; flat < n; ++flat) {
      const std::size_t j = (flat / stride[axis]) % dims[axis];
      if (j == 0 || j + 1 == dims[axis]) continue;
      const double lo = mean_h / (k[j] - k[j - 1]);
      const double hi = mean_h / (k[j + 1] - k[j]);
      d_entries.emplace_back(row, static_cast<Eigen::Index>(flat - stride[axis]), lo);
      d_entries.emplace_back(row, static_cast<Eigen::Index>(flat), -(lo + hi));
      d_entries.emplace_back(row, static_cast<Eigen::Index>(flat + stride[axis]), hi);
      ++row;
    }
  }
  Eigen::SparseMatrix<double> d(row, en);
  d.setFromTriplets(d_entries.begin(), d_entries.end());

  Eigen::SparseMatrix<double> normal = Eigen::SparseMatrix<double>(a.transpose()) * a;
  if (row > 0 && smoothing_lambda > 0.0) {
    normal += smoothing_lambda * (Eigen::SparseMatrix<double>(d.transpose()) * d);
  }
  rhs = a.transpose() * alpha;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(normal);
  const Eigen::VectorXd pivots = solver.info() == Eigen::Success ? solver.vectorD() : Eigen::VectorXd();
  const double max_pivot = pivots.size() ? pivots.cwiseAbs().maxCoeff() : 0.0;
  if (solver.info() != Eigen::Success || !(max_pivot > 0.0) || !pivots.allFinite() ||
      (pivots.array().abs() <= 1e-12 * max_pivot).any() || (pivots.array() < 0.0).any()) {
    std::string msg = "train_cd: least-squares system is rank deficient";
    if (pivots.size()) {
      msg += "; weakly constrained support point(s):";
      int listed = 0;
      for (Eigen::Index p = 0; p < pivots.size() && listed < 8; ++p) {
        if (std::abs(pivots[p]) <= 1e-12 * max_pivot || pivots[p] < 0.0) {
          msg += " " + cell_name(axes, static_cast<std::size_t>(solver.permutationPinv().indices()[p]));
          ++listed;
        }
      }
    }
    throw Error(Errc::rank_deficient, msg);
  }
  const Eigen::VectorXd u = solver.solve(rhs);
  if (!u.allFinite()) throw Error(Errc::rank_deficient, "train_cd: solution is not finite");

  CDGrid grid(axes, std::vector<double>(u.data(), u.data() + u.size()), smoothing_lambda, owner);
  for (const auto& s : samples) {
    local_report.max_residual = std::max(local_report.max_residual, std::abs(query(grid, s.load_case).value - s.alpha));
  }
  if (report) *report = local_report;
  return grid;
}

std::vector<CDGrid> train_all(std::span<const NodeSubset> optimal_subsets, const FieldsByFace& fields,
                              std::span<const LoadCase> cases, const CDAxes& axes, double smoothing_lambda,
                              std::vector<CDTrainReport>* reports) {
  std::vector<CDGrid> grids;
  if (reports) reports->clear();
  for (const auto& subset : optimal_subsets) {
    if (subset.members.empty()) continue;
    const auto face_it = fields.find(subset.face_id);
    if (face_it == fields.end()) {
      throw Error(Errc::missing_input, "train_all: no HTC fields for face " + std::to_string(subset.face_id));
    }
    std::vector<const HTCField*> per_case;
    per_case.reserve(cases.size());
    for (const auto& c : cases) {
      const auto it = face_it->second.find(c.case_id);
      if (it == face_it->second.end()) {
        throw Error(Errc::missing_input, "train_all: missing field for face " + std::to_string(subset.face_id) +
                                             ", case " + std::to_string(c.case_id));
      }
      per_case.push_back(&it->second);
    }
    for (auto node : subset.members) {
      std::vector<CDSample> samples;
      samples.reserve(cases.size());
      for (std::size_t c = 0; c < cases.size(); ++c) samples.push_back({cases[c], per_case[c]->values.at(node)});
      CDTrainReport report;
      grids.push_back(train_cd(samples, axes, smoothing_lambda, {subset.face_id, node}, &report));
      if (reports) reports->push_back(report);
    }
  }
  return grids;
}

Reconstruction reconstruct_face_detailed(const Face& face, const NodeSubset& subset, std::span<const CDGrid> cds,
                                         const LoadCase& load_case, const FitnessOptions& kernel_options) {
  subset.validate(face.size());
  if (subset.members.empty()) throw Error(Errc::invalid_argument, "reconstruct_face: empty subset");
  Reconstruction out;
  out.subset_values.reserve(subset.members.size());
  for (auto node : subset.members) {
    const auto it = std::find_if(cds.begin(), cds.end(), [&](const CDGrid& g) {
      return g.owner().face_id == face.face_id() && g.owner().node_index == node;
    });
    if (it == cds.end()) {
      throw Error(Errc::missing_input, "reconstruct_face: no CD for face " + std::to_string(face.face_id()) +
                                           ", node index " + std::to_string(node));
    }
    const CDQuery q = query(*it, load_case);
    out.extrapolated = out.extrapolated || q.extrapolated;
    out.subset_values.push_back(q.value);
  }
  const auto model = rbf::fit(face.positions(subset.members), out.subset_values, kernel_options.fit_options());
  out.field = {face.face_id(), load_case.case_id, model.eval(face.positions())};
  for (double& w : out.field.values) w = std::max(w, kMinHtc);
  return out;
}

HTCField reconstruct_face(const Face& face, const NodeSubset& subset, std::span<const CDGrid> cds,
                          const LoadCase& load_case, const FitnessOptions& kernel_options) {
  return reconstruct_face_detailed(face, subset, cds, load_case, kernel_options).field;
}

}  // namespace htc
