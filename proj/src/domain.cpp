#include "htcflow/domain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "htcflow/error.hpp"

namespace htc {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::malformed_header: return "malformed header";
    case Errc::malformed_row: return "malformed row";
    case Errc::node_count_mismatch: return "node count mismatch";
    case Errc::non_finite_value: return "non-finite value";
    case Errc::unknown_node: return "unknown node id";
    case Errc::duplicate_node: return "duplicate node id";
    case Errc::coordinate_mismatch: return "coordinate mismatch";
    case Errc::off_plane: return "point off plane";
    case Errc::duplicate_centers: return "duplicate centers";
    case Errc::singular_system: return "singular system";
    case Errc::rank_deficient: return "rank deficient";
    case Errc::budget_exceeded: return "budget exceeded";
    case Errc::io: return "i/o error";
    case Errc::missing_input: return "missing input";
    case Errc::task_failed: return "task failed";
  }
  return "unknown";
}

namespace {

double polygon_diameter(const std::vector<Point3>& boundary) {
  double d = 0.0;
  for (const auto& a : boundary)
    for (const auto& b : boundary) d = std::max(d, (a - b).norm());
  return d;
}

}  // namespace

Face::Face(FaceId face_id, std::vector<FaceNode> nodes, std::vector<Point3> boundary)
    : face_id_(face_id), nodes_(std::move(nodes)), boundary_(std::move(boundary)) {
  if (nodes_.empty()) throw Error(Errc::invalid_argument, "face " + std::to_string(face_id_) + " has no nodes");
  frame_ = PlaneFrame::of_polygon(boundary_);
  const double tol = kPlaneTolerance * std::max(1.0, polygon_diameter(boundary_));
  for (const auto& b : boundary_) {
    if (std::abs(frame_.signed_distance(b)) > tol) {
      throw Error(Errc::off_plane, "face " + std::to_string(face_id_) + ": boundary polygon is not planar");
    }
  }
  if (!polygon_is_simple(boundary_, frame_)) {
    throw Error(Errc::invalid_argument, "face " + std::to_string(face_id_) + ": boundary polygon self-intersects");
  }
  std::unordered_set<NodeId> seen;
  for (const auto& n : nodes_) {
    if (!seen.insert(n.node_id).second) {
      throw Error(Errc::duplicate_node, "face " + std::to_string(face_id_) + ": duplicate node id " +
                                            std::to_string(n.node_id));
    }
    if (!n.position.allFinite()) {
      throw Error(Errc::non_finite_value, "face " + std::to_string(face_id_) + ": non-finite node position");
    }
    if (std::abs(frame_.signed_distance(n.position)) > tol) {
      throw Error(Errc::off_plane, "face " + std::to_string(face_id_) + ": node " + std::to_string(n.node_id) +
                                       " is off the face plane");
    }
    if (!polygon_contains(boundary_, frame_, n.position, tol)) {
      throw Error(Errc::invalid_argument, "face " + std::to_string(face_id_) + ": node " +
                                              std::to_string(n.node_id) + " lies outside the boundary");
    }
  }
}

std::size_t Face::index_of(NodeId id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].node_id == id) return i;
  return npos;
}

std::vector<Point3> Face::positions() const {
  std::vector<Point3> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.position);
  return out;
}

std::vector<Point3> Face::positions(const std::vector<std::size_t>& indices) const {
  std::vector<Point3> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(nodes_.at(i).position);
  return out;
}

Face gen_rect_face(FaceId face_id, int rows, int cols, double width, double height, const Point3& origin,
                   Axis normal_axis) {
  if (rows < 1 || cols < 1) throw Error(Errc::invalid_argument, "gen_rect_face: rows and cols must be >= 1");
  if (!(width > 0.0) || !(height > 0.0)) {
    throw Error(Errc::invalid_argument, "gen_rect_face: width and height must be positive");
  }
  Point3 u;
  Point3 v;
  switch (normal_axis) {
    case Axis::z: u = Point3::UnitX(); v = Point3::UnitY(); break;
    case Axis::x: u = Point3::UnitY(); v = Point3::UnitZ(); break;
    case Axis::y: u = Point3::UnitZ(); v = Point3::UnitX(); break;
  }
  auto coord = [](int i, int count, double extent) {
    return count == 1 ? 0.5 * extent : extent * static_cast<double>(i) / static_cast<double>(count - 1);
  };
  std::vector<FaceNode> nodes;
  nodes.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const NodeId id = static_cast<NodeId>(r) * cols + c;
      nodes.push_back({id, origin + coord(c, cols, width) * u + coord(r, rows, height) * v});
    }
  }
  std::vector<Point3> boundary{origin, origin + width * u, origin + width * u + height * v, origin + height * v};
  return Face(face_id, std::move(nodes), std::move(boundary));
}

void LoadCase::validate() const {
  if (!std::isfinite(t_air) || !std::isfinite(v) || !std::isfinite(az) || !std::isfinite(el)) {
    throw Error(Errc::non_finite_value, "load case " + std::to_string(case_id) + " has non-finite fields");
  }
  if (v < 0.0) throw Error(Errc::invalid_argument, "load case " + std::to_string(case_id) + ": v < 0");
  if (az < 0.0 || az >= 360.0) {
    throw Error(Errc::invalid_argument, "load case " + std::to_string(case_id) + ": az outside [0, 360)");
  }
  if (el < -90.0 || el > 90.0) {
    throw Error(Errc::invalid_argument, "load case " + std::to_string(case_id) + ": el outside [-90, 90]");
  }
}

void CaseGrid::validate() const {
  auto check = [](const std::vector<double>& axis, const char* name) {
    if (axis.empty()) throw Error(Errc::invalid_argument, std::string("case grid axis '") + name + "' is empty");
    for (std::size_t i = 0; i < axis.size(); ++i) {
      if (!std::isfinite(axis[i])) {
        throw Error(Errc::non_finite_value, std::string("case grid axis '") + name + "' has a non-finite value");
      }
      if (i > 0 && !(axis[i] > axis[i - 1])) {
        throw Error(Errc::invalid_argument, std::string("case grid axis '") + name + "' is not strictly increasing");
      }
    }
  };
  check(t_values, "t");
  check(v_values, "v");
  check(az_values, "az");
  check(el_values, "el");
}

std::vector<LoadCase> enumerate_cases(const CaseGrid& grid) {
  grid.validate();
  std::vector<LoadCase> cases;
  cases.reserve(grid.size());
  CaseId id = 0;
  for (double t : grid.t_values)
    for (double v : grid.v_values)
      for (double az : grid.az_values)
        for (double el : grid.el_values) {
          LoadCase c{id++, t, v, az, el};
          c.validate();
          cases.push_back(c);
        }
  return cases;
}

void HTCField::validate(const Face& face) const {
  if (face_id != face.face_id()) {
    throw Error(Errc::invalid_argument, "field face_id " + std::to_string(face_id) + " does not match face " +
                                            std::to_string(face.face_id()));
  }
  if (values.size() != face.size()) {
    throw Error(Errc::node_count_mismatch, "field has " + std::to_string(values.size()) + " values, face " +
                                               std::to_string(face.face_id()) + " has " +
                                               std::to_string(face.size()) + " nodes");
  }
  for (double w : values) {
    if (!std::isfinite(w)) throw Error(Errc::non_finite_value, "field contains a non-finite HTC value");
    if (!(w > 0.0)) throw Error(Errc::invalid_argument, "field contains a non-positive HTC value");
  }
}

std::string htc_file_name(FaceId face_id, CaseId case_id) {
  return "face_" + std::to_string(face_id) + "_case_" + std::to_string(case_id) + ".csv";
}

std::string format_double17(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || first == last) {
    throw Error(Errc::malformed_row, "cannot parse number '" + std::string(token) + "'");
  }
  return value;
}

std::string format_htc_csv(const HTCField& field, const Face& face) {
  field.validate(face);
  std::string out = "node_id,x,y,z,htc\n";
  for (std::size_t i = 0; i < face.size(); ++i) {
    const auto& n = face.node(i);
    out += std::to_string(n.node_id);
    for (int k = 0; k < 3; ++k) {
      out += ',';
      out += format_double17(n.position[k]);
    }
    out += ',';
    out += format_double17(field.values[i]);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      break;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

}  // namespace

HTCField parse_htc_csv(std::string_view text, const Face& face, CaseId case_id) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    std::string_view line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = pos + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != "node_id,x,y,z,htc") {
    throw Error(Errc::malformed_header, "expected header 'node_id,x,y,z,htc'");
  }

  HTCField field{face.face_id(), case_id, std::vector<double>(face.size(), 0.0)};
  std::vector<bool> filled(face.size(), false);
  const double tol = Face::kPlaneTolerance * 1e3;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto parts = split_commas(lines[li]);
    if (parts.size() != 5) {
      throw Error(Errc::malformed_row, "row " + std::to_string(li) + ": expected 5 columns");
    }
    NodeId id = 0;
    auto res = std::from_chars(parts[0].data(), parts[0].data() + parts[0].size(), id);
    if (res.ec != std::errc() || res.ptr != parts[0].data() + parts[0].size()) {
      throw Error(Errc::malformed_row, "row " + std::to_string(li) + ": bad node_id");
    }
    Point3 pos;
    for (int k = 0; k < 3; ++k) pos[k] = parse_double(parts[1 + k]);
    const double htc = parse_double(parts[4]);
    if (!pos.allFinite() || !std::isfinite(htc)) {
      throw Error(Errc::non_finite_value, "row " + std::to_string(li) + ": non-finite value");
    }
    const std::size_t index = face.index_of(id);
    if (index == Face::npos) {
      throw Error(Errc::unknown_node, "row " + std::to_string(li) + ": node " + std::to_string(id) +
                                          " is not on face " + std::to_string(face.face_id()));
    }
    if (filled[index]) throw Error(Errc::duplicate_node, "node " + std::to_string(id) + " listed twice");
    if ((pos - face.node(index).position).norm() > tol) {
      throw Error(Errc::coordinate_mismatch, "node " + std::to_string(id) + ": coordinates differ from the face");
    }
    field.values[index] = htc;
    filled[index] = true;
  }
  if (lines.size() - 1 != face.size()) {
    throw Error(Errc::node_count_mismatch, "file has " + std::to_string(lines.size() - 1) + " rows, face " +
                                               std::to_string(face.face_id()) + " has " +
                                               std::to_string(face.size()) + " nodes");
  }
  field.validate(face);
  return field;
}

void write_htc_csv(const HTCField& field, const Face& face, const std::filesystem::path& path) {
  const std::string text = format_htc_csv(field, face);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

HTCField read_htc_csv(const std::filesystem::path& path, const Face& face) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_input, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  CaseId case_id = 0;
  const std::string name = path.filename().string();
  const auto marker = name.find("_case_");
  if (name.rfind("face_", 0) == 0 && marker != std::string::npos) {
    const char* first = name.data() + marker + 6;
    const char* last = name.data() + name.size();
    std::from_chars(first, last, case_id);
  }
  return parse_htc_csv(ss.str(), face, case_id);
}

}  // namespace htc
