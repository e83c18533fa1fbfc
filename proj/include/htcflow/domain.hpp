#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "htcflow/geometry.hpp"

namespace htc {

using FaceId = std::int64_t;
using CaseId = std::int64_t;
using NodeId = std::int64_t;

struct FaceNode {
  NodeId node_id = 0;
  Point3 position = Point3::Zero();
};

/// A planar machine face: FE nodes plus the closed boundary polygon that contains them.
/// Construction validates the invariants; instances are immutable afterwards.
class Face {
 public:
  static constexpr double kPlaneTolerance = 1e-9;

  Face(FaceId face_id, std::vector<FaceNode> nodes, std::vector<Point3> boundary);

  FaceId face_id() const noexcept { return face_id_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<FaceNode>& nodes() const noexcept { return nodes_; }
  const FaceNode& node(std::size_t index) const { return nodes_.at(index); }
  const std::vector<Point3>& boundary() const noexcept { return boundary_; }
  const PlaneFrame& frame() const noexcept { return frame_; }

  /// Index into nodes() for a node id, or npos.
  std::size_t index_of(NodeId id) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::vector<Point3> positions() const;
  std::vector<Point3> positions(const std::vector<std::size_t>& indices) const;

 private:
  FaceId face_id_;
  std::vector<FaceNode> nodes_;
  std::vector<Point3> boundary_;
  PlaneFrame frame_;
};

enum class Axis { x, y, z };

/// Structured rows x cols lattice on a width x height rectangle whose lower corner is
/// `origin` and whose normal is `normal_axis`. Node ids run 0..rows*cols-1 row-major.
/// A single row or column sits on the rectangle's midline.
Face gen_rect_face(FaceId face_id, int rows, int cols, double width, double height, const Point3& origin,
                   Axis normal_axis = Axis::z);

struct LoadCase {
  CaseId case_id = 0;
  double t_air = 20.0;  // degC
  double v = 0.0;       // m/s
  double az = 0.0;      // deg
  double el = 0.0;      // deg

  void validate() const;
  bool same_conditions(const LoadCase& other) const {
    return t_air == other.t_air && v == other.v && az == other.az && el == other.el;
  }
};

struct CaseGrid {
  std::vector<double> t_values;
  std::vector<double> v_values;
  std::vector<double> az_values{0.0};
  std::vector<double> el_values{0.0};

  void validate() const;
  std::size_t size() const {
    return t_values.size() * v_values.size() * az_values.size() * el_values.size();
  }
};

/// Cartesian product, t outermost and el innermost; case_id is the 0-based position.
std::vector<LoadCase> enumerate_cases(const CaseGrid& grid);

struct HTCField {
  FaceId face_id = 0;
  CaseId case_id = 0;
  std::vector<double> values;  // W/(m^2 K), one per face node in Face::nodes() order

  void validate(const Face& face) const;
  bool operator==(const HTCField&) const = default;
};

/// `face_<face_id>_case_<case_id>.csv`
std::string htc_file_name(FaceId face_id, CaseId case_id);

/// CSV schema: header `node_id,x,y,z,htc`, one LF-terminated row per node,
/// doubles in 17 significant digits.
std::string format_htc_csv(const HTCField& field, const Face& face);
HTCField parse_htc_csv(std::string_view text, const Face& face, CaseId case_id);

void write_htc_csv(const HTCField& field, const Face& face, const std::filesystem::path& path);
/// The case id is recovered from the file name when it follows htc_file_name(), else 0.
HTCField read_htc_csv(const std::filesystem::path& path, const Face& face);

/// Shortest-exact and 17-digit renderings used by every text format in the project.
std::string format_double17(double value);
double parse_double(std::string_view token);

}  // namespace htc
