#pragma once

#include <array>
#include <map>
#include <span>
#include <vector>

#include "htcflow/domain.hpp"
#include "htcflow/ga_cluster.hpp"

namespace htc {

/// Knot lists for the load-case coordinates, in the order t_air, v, az, el.
struct CDAxes {
  std::array<std::vector<double>, 4> knots;

  void validate() const;
  std::size_t size() const;
  static CDAxes from_grid(const CaseGrid& grid);
  bool operator==(const CDAxes&) const = default;
};

struct CDOwner {
  FaceId face_id = 0;
  std::size_t node_index = 0;
  bool operator==(const CDOwner&) const = default;
};

/// Characteristic diagram for one node: support values on a 4D tensor grid with
/// multilinear interpolation between knots. Axes with a single knot are collapsed.
class CDGrid {
 public:
  CDGrid(CDAxes axes, std::vector<double> support_values, double smoothing_lambda, CDOwner owner);

  const CDAxes& axes() const noexcept { return axes_; }
  /// Row-major over (t, v, az, el): el varies fastest.
  const std::vector<double>& support_values() const noexcept { return values_; }
  double smoothing_lambda() const noexcept { return lambda_; }
  const CDOwner& owner() const noexcept { return owner_; }

  std::size_t flat_index(const std::array<std::size_t, 4>& index) const;
  double at(const std::array<std::size_t, 4>& index) const { return values_[flat_index(index)]; }

  bool operator==(const CDGrid&) const = default;

 private:
  CDAxes axes_;
  std::vector<double> values_;
  double lambda_;
  CDOwner owner_;
};

struct CDQuery {
  double value = 0.0;
  bool extrapolated = false;  // some coordinate was clamped into the axis range
};

CDQuery query(const CDGrid& grid, const LoadCase& load_case);

struct CDSample {
  LoadCase load_case;
  double alpha = 0.0;
};

struct CDTrainReport {
  std::size_t clamped_samples = 0;
  double max_residual = 0.0;  // max |query(case_i) - alpha_i|
};

/// Minimises sum_i (query(case_i) - alpha_i)^2 + lambda * sum (axis-wise second differences)^2.
/// Second differences are divided by the knot spacing (scaled by the axis' mean spacing), so
/// affine data carries zero penalty on non-uniform axes too.
/// Throws Error{rank_deficient} naming unconstrained cells when the system has no unique solution.
CDGrid train_cd(std::span<const CDSample> samples, const CDAxes& axes, double smoothing_lambda, CDOwner owner = {},
                CDTrainReport* report = nullptr);

/// Per-face HTC fields keyed by case id.
using FieldsByFace = std::map<FaceId, std::map<CaseId, HTCField>>;

/// One diagram per optimal node, trained on that node's HTC over every case.
std::vector<CDGrid> train_all(std::span<const NodeSubset> optimal_subsets, const FieldsByFace& fields,
                              std::span<const LoadCase> cases, const CDAxes& axes, double smoothing_lambda,
                              std::vector<CDTrainReport>* reports = nullptr);

struct Reconstruction {
  HTCField field;
  std::vector<double> subset_values;  // CD predictions at the subset's nodes
  bool extrapolated = false;
};

/// Queries each optimal node's diagram, interpolates those values with RBFs over the
/// whole face. Values are floored at kMinHtc.
Reconstruction reconstruct_face_detailed(const Face& face, const NodeSubset& subset, std::span<const CDGrid> cds,
                                         const LoadCase& load_case, const FitnessOptions& kernel_options = {});
HTCField reconstruct_face(const Face& face, const NodeSubset& subset, std::span<const CDGrid> cds,
                          const LoadCase& load_case, const FitnessOptions& kernel_options = {});

}  // namespace htc
