#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "htcflow/balancer.hpp"
#include "htcflow/cdiag.hpp"
#include "htcflow/domain.hpp"
#include "htcflow/ga_cluster.hpp"
#include "htcflow/surrogate.hpp"

// JSON documents exchanged between pipeline stages. Every top-level document carries
// {"format": "...", "version": 1}; readers reject other formats or versions.

namespace htc {

using Json = nlohmann::ordered_json;

inline constexpr int kDocumentVersion = 1;

void to_json(Json& j, const LoadCase& c);
void from_json(const Json& j, LoadCase& c);
void to_json(Json& j, const CaseGrid& g);
void from_json(const Json& j, CaseGrid& g);
void to_json(Json& j, const SurrogateParams& p);
void from_json(const Json& j, SurrogateParams& p);
void to_json(Json& j, const GAParams& p);
void from_json(const Json& j, GAParams& p);
void to_json(Json& j, const CDAxes& a);
void from_json(const Json& j, CDAxes& a);
void to_json(Json& j, const RuntimeModel& m);
void from_json(const Json& j, RuntimeModel& m);

Json case_manifest_document(const std::vector<LoadCase>& cases);
std::vector<LoadCase> parse_case_manifest(const Json& doc);

Json subset_document(const NodeSubset& subset, const GAParams& params);
struct SubsetRecord {
  NodeSubset subset;
  GAParams ga_params;
};
SubsetRecord parse_subset_document(const Json& doc);

Json cd_document(const CDGrid& grid);
CDGrid parse_cd_document(const Json& doc);
/// All diagrams of one face.
Json cd_set_document(FaceId face_id, const std::vector<CDGrid>& grids);
std::vector<CDGrid> parse_cd_set_document(const Json& doc);

/// Bin -> faces, plus per-bin estimated (and measured, when given) loads.
Json schedule_document(const MeasuredBalance& balance, const std::vector<double>& measured_bin_seconds = {});
struct ScheduleRecord {
  Schedule schedule;
  std::vector<Task> tasks;
  std::vector<FaceId> probe_faces;
  std::optional<RuntimeModel> model;
  std::vector<double> measured_bin_seconds;
};
ScheduleRecord parse_schedule_document(const Json& doc);

/// Canonical rendering: two-space indent, trailing newline.
std::string dump_document(const Json& doc);
Json parse_document(std::string_view text, std::string_view expected_format);

Json read_document(const std::filesystem::path& path, std::string_view expected_format);

}  // namespace htc
