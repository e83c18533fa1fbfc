#include "htcflow/documents.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "htcflow/error.hpp"

namespace htc {

namespace {

Json header(std::string_view format) {
  Json j;
  j["format"] = format;
  j["version"] = kDocumentVersion;
  return j;
}

template <typename T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(Errc::missing_input, std::string("document is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("document field '") + key + "': " + e.what());
  }
}

template <typename T>
void get_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = get<T>(j, key);
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

void to_json(Json& j, const LoadCase& c) {
  j = Json{{"case_id", c.case_id}, {"t_air", c.t_air}, {"v", c.v}, {"az", c.az}, {"el", c.el}};
}

void from_json(const Json& j, LoadCase& c) {
  c.case_id = get<CaseId>(j, "case_id");
  c.t_air = get<double>(j, "t_air");
  c.v = get<double>(j, "v");
  c.az = get<double>(j, "az");
  c.el = get<double>(j, "el");
  c.validate();
}

void to_json(Json& j, const CaseGrid& g) {
  j = Json{{"t", g.t_values}, {"v", g.v_values}, {"az", g.az_values}, {"el", g.el_values}};
}

void from_json(const Json& j, CaseGrid& g) {
  g.t_values = get<std::vector<double>>(j, "t");
  g.v_values = get<std::vector<double>>(j, "v");
  get_opt(j, "az", g.az_values);
  get_opt(j, "el", g.el_values);
  g.validate();
}

void to_json(Json& j, const SurrogateParams& p) {
  j = Json{{"base", p.base},
           {"vel_coeff", p.vel_coeff},
           {"vel_exponent", p.vel_exponent},
           {"temp_coeff", p.temp_coeff},
           {"edge_amp", p.edge_amp},
           {"edge_scale", p.edge_scale},
           {"face_phase", p.face_phase},
           {"cost_mode", p.cost_mode == CostMode::none ? "none" : p.cost_mode == CostMode::sleep ? "sleep" : "spin"},
           {"cost_seconds", p.cost_seconds}};
}

void from_json(const Json& j, SurrogateParams& p) {
  get_opt(j, "base", p.base);
  get_opt(j, "vel_coeff", p.vel_coeff);
  get_opt(j, "vel_exponent", p.vel_exponent);
  get_opt(j, "temp_coeff", p.temp_coeff);
  get_opt(j, "edge_amp", p.edge_amp);
  get_opt(j, "edge_scale", p.edge_scale);
  get_opt(j, "face_phase", p.face_phase);
  get_opt(j, "cost_seconds", p.cost_seconds);
  if (j.contains("cost_mode")) {
    const auto mode = get<std::string>(j, "cost_mode");
    if (mode == "none") p.cost_mode = CostMode::none;
    else if (mode == "sleep") p.cost_mode = CostMode::sleep;
    else if (mode == "spin") p.cost_mode = CostMode::spin;
    else throw Error(Errc::invalid_argument, "unknown cost_mode '" + mode + "'");
  }
  p.validate();
}

void to_json(Json& j, const GAParams& p) {
  j = Json{{"population_size", p.population_size}, {"generations", p.generations},
           {"crossover_prob", p.crossover_prob},   {"mutation_prob", p.mutation_prob},
           {"tournament_size", p.tournament_size}, {"elitism_count", p.elitism_count},
           {"rng_seed", p.rng_seed}};
}

void from_json(const Json& j, GAParams& p) {
  get_opt(j, "population_size", p.population_size);
  get_opt(j, "generations", p.generations);
  get_opt(j, "crossover_prob", p.crossover_prob);
  get_opt(j, "mutation_prob", p.mutation_prob);
  get_opt(j, "tournament_size", p.tournament_size);
  get_opt(j, "elitism_count", p.elitism_count);
  get_opt(j, "rng_seed", p.rng_seed);
  p.validate();
}

void to_json(Json& j, const CDAxes& a) {
  j = Json{{"t_air", a.knots[0]}, {"v", a.knots[1]}, {"az", a.knots[2]}, {"el", a.knots[3]}};
}

void from_json(const Json& j, CDAxes& a) {
  a.knots[0] = get<std::vector<double>>(j, "t_air");
  a.knots[1] = get<std::vector<double>>(j, "v");
  a.knots[2] = get<std::vector<double>>(j, "az");
  a.knots[3] = get<std::vector<double>>(j, "el");
  a.validate();
}

void to_json(Json& j, const RuntimeModel& m) {
  Json samples = Json::array();
  for (const auto& [n, s] : m.sample_points) samples.push_back(Json::array({n, s}));
  j = Json{{"c0", m.c0}, {"c1", m.c1}, {"c2", m.c2}, {"degree", m.degree}, {"samples", samples},
           {"residuals", m.residuals}};
}

void from_json(const Json& j, RuntimeModel& m) {
  m.c0 = get<double>(j, "c0");
  m.c1 = get<double>(j, "c1");
  m.c2 = get<double>(j, "c2");
  m.degree = get<int>(j, "degree");
  m.sample_points.clear();
  for (const auto& s : get<Json>(j, "samples")) m.sample_points.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
  m.residuals = get<std::vector<double>>(j, "residuals");
}

Json case_manifest_document(const std::vector<LoadCase>& cases) {
  Json doc = header("htcflow.cases");
  doc["cases"] = cases;
  return doc;
}

std::vector<LoadCase> parse_case_manifest(const Json& doc) {
  auto cases = get<std::vector<LoadCase>>(doc, "cases");
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (cases[i].case_id != static_cast<CaseId>(i)) {
      throw Error(Errc::invalid_argument, "case manifest: case ids must be 0..n-1 in order");
    }
  }
  return cases;
}

Json subset_document(const NodeSubset& subset, const GAParams& params) {
  Json doc = header("htcflow.subset");
  doc["face_id"] = subset.face_id;
  doc["m"] = subset.members.size();
  doc["members"] = subset.members;
  doc["fitness"] = subset.fitness ? finite_or_null(*subset.fitness) : Json(nullptr);
  doc["ga_params"] = params;
  doc["seed"] = params.rng_seed;
  return doc;
}

SubsetRecord parse_subset_document(const Json& doc) {
  SubsetRecord r;
  r.subset.face_id = get<FaceId>(doc, "face_id");
  r.subset.members = get<std::vector<std::size_t>>(doc, "members");
  if (get<std::size_t>(doc, "m") != r.subset.members.size()) {
    throw Error(Errc::invalid_argument, "subset document: m does not match the member count");
  }
  if (doc.contains("fitness") && !doc["fitness"].is_null()) r.subset.fitness = doc["fitness"].get<double>();
  r.ga_params = get<GAParams>(doc, "ga_params");
  r.ga_params.rng_seed = get<std::uint64_t>(doc, "seed");
  return r;
}

Json cd_document(const CDGrid& grid) {
  Json doc = header("htcflow.cd");
  doc["owner"] = Json{{"face_id", grid.owner().face_id}, {"node_index", grid.owner().node_index}};
  doc["lambda"] = grid.smoothing_lambda();
  doc["axes"] = grid.axes();
  doc["support_values"] = grid.support_values();
  return doc;
}

CDGrid parse_cd_document(const Json& doc) {
  const Json owner = get<Json>(doc, "owner");
  return CDGrid(get<CDAxes>(doc, "axes"), get<std::vector<double>>(doc, "support_values"), get<double>(doc, "lambda"),
                {get<FaceId>(owner, "face_id"), get<std::size_t>(owner, "node_index")});
}

Json cd_set_document(FaceId face_id, const std::vector<CDGrid>& grids) {
  Json doc = header("htcflow.cd_set");
  doc["face_id"] = face_id;
  Json list = Json::array();
  for (const auto& g : grids) list.push_back(cd_document(g));
  doc["diagrams"] = std::move(list);
  return doc;
}

std::vector<CDGrid> parse_cd_set_document(const Json& doc) {
  std::vector<CDGrid> out;
  for (const auto& g : get<Json>(doc, "diagrams")) {
    if (g.value("format", "") != "htcflow.cd") throw Error(Errc::invalid_argument, "cd set: bad diagram entry");
    out.push_back(parse_cd_document(g));
  }
  return out;
}

Json schedule_document(const MeasuredBalance& balance, const std::vector<double>& measured_bin_seconds) {
  Json doc = header("htcflow.schedule");
  Json bins = Json::array();
  for (std::size_t b = 0; b < balance.schedule.n_bins(); ++b) {
    Json bin{{"bin", b}, {"faces", balance.schedule.bins[b]}, {"estimated_s", balance.schedule.bin_loads[b]}};
    bin["measured_s"] = b < measured_bin_seconds.size() ? Json(measured_bin_seconds[b]) : Json(nullptr);
    bins.push_back(std::move(bin));
  }
  doc["bins"] = std::move(bins);
  doc["makespan_estimated_s"] = balance.schedule.makespan;
  Json tasks = Json::array();
  for (const auto& t : balance.tasks) {
    tasks.push_back(Json{{"face_id", t.task_id},
                         {"n_nodes", t.n_nodes},
                         {"estimated_s", t.estimated_seconds},
                         {"measured_s", t.measured_seconds ? Json(*t.measured_seconds) : Json(nullptr)}});
  }
  doc["tasks"] = std::move(tasks);
  doc["probe_faces"] = balance.probe_faces;
  doc["runtime_model"] = balance.model ? Json(*balance.model) : Json(nullptr);
  return doc;
}

ScheduleRecord parse_schedule_document(const Json& doc) {
  ScheduleRecord r;
  for (const auto& bin : get<Json>(doc, "bins")) {
    r.schedule.bins.push_back(get<std::vector<std::int64_t>>(bin, "faces"));
    r.schedule.bin_loads.push_back(get<double>(bin, "estimated_s"));
    if (bin.contains("measured_s") && !bin["measured_s"].is_null()) {
      r.measured_bin_seconds.push_back(bin["measured_s"].get<double>());
    }
  }
  r.schedule.makespan = get<double>(doc, "makespan_estimated_s");
  for (const auto& t : get<Json>(doc, "tasks")) {
    Task task{get<std::int64_t>(t, "face_id"), get<std::size_t>(t, "n_nodes"), get<double>(t, "estimated_s"),
              std::nullopt};
    if (!t["measured_s"].is_null()) task.measured_seconds = t["measured_s"].get<double>();
    r.tasks.push_back(task);
  }
  r.probe_faces = get<std::vector<FaceId>>(doc, "probe_faces");
  if (!doc["runtime_model"].is_null()) r.model = doc["runtime_model"].get<RuntimeModel>();
  return r;
}

std::string dump_document(const Json& doc) { return doc.dump(2) + "\n"; }

Json parse_document(std::string_view text, std::string_view expected_format) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_header, std::string("document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != expected_format) {
    throw Error(Errc::malformed_header, "expected a '" + std::string(expected_format) + "' document");
  }
  if (doc.value("version", 0) != kDocumentVersion) {
    throw Error(Errc::malformed_header, "unsupported document version");
  }
  return doc;
}

Json read_document(const std::filesystem::path& path, std::string_view expected_format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_input, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_document(ss.str(), expected_format);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace htc
