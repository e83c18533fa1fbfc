#include "htcflow/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "htcflow/balancer.hpp"
#include "htcflow/error.hpp"
#include "htcflow/rng.hpp"

namespace htc {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config

void PipelineConfig::validate() const {
  if (faces.empty()) throw Error(Errc::invalid_argument, "config: no faces");
  std::vector<FaceId> ids;
  for (const auto& f : faces) ids.push_back(f.face_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(Errc::invalid_argument, "config: duplicate face_id");
  }
  case_grid.validate();
  surrogate.validate();
  ga.validate();
  axes().validate();
  if (!(cd_lambda >= 0.0)) throw Error(Errc::invalid_argument, "config: cd lambda must be >= 0");
  if (workers && *workers < 1) throw Error(Errc::invalid_argument, "config: workers must be >= 1");
  if (!(setup_cost_s >= 0.0)) throw Error(Errc::invalid_argument, "config: setup_cost_s must be >= 0");
  if (!(probe_fraction > 0.0 && probe_fraction <= 1.0)) {
    throw Error(Errc::invalid_argument, "config: probe_fraction must lie in (0, 1]");
  }
  for (const auto& f : faces) {
    const auto n = static_cast<std::size_t>(std::max(f.rows, 0)) * static_cast<std::size_t>(std::max(f.cols, 0));
    const std::size_t m_face = m_for(f.face_id);
    if (m_face < 1 || m_face > n) {
      throw Error(Errc::invalid_argument, "config: m = " + std::to_string(m_face) + " invalid for face " +
                                              std::to_string(f.face_id) + " with " + std::to_string(n) + " nodes");
    }
  }
  if (rbf.shape_eps && !(*rbf.shape_eps > 0.0)) throw Error(Errc::invalid_argument, "config: shape_eps must be > 0");
}

std::size_t PipelineConfig::m_for(FaceId face_id) const {
  const auto it = m_per_face.find(face_id);
  return it == m_per_face.end() ? m : it->second;
}

std::vector<Face> PipelineConfig::build_faces() const {
  std::vector<Face> out;
  out.reserve(faces.size());
  for (const auto& f : faces) {
    out.push_back(gen_rect_face(f.face_id, f.rows, f.cols, f.width, f.height, f.origin, f.normal_axis));
  }
  return out;
}

SurrogateParams PipelineConfig::surrogate_for(const FaceSpec& spec) const {
  SurrogateParams p = surrogate;
  p.face_phase = spec.phase.value_or(surrogate.face_phase + spec.face_id);
  return p;
}

GAParams PipelineConfig::ga_for(FaceId face_id) const {
  GAParams p = ga;
  p.rng_seed = derive_seed(rng_seed, static_cast<std::uint64_t>(face_id));
  return p;
}

namespace {

const char* axis_name(Axis a) { return a == Axis::x ? "x" : a == Axis::y ? "y" : "z"; }

Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::x;
  if (s == "y") return Axis::y;
  if (s == "z") return Axis::z;
  throw Error(Errc::invalid_argument, "config: normal_axis must be x, y or z");
}

const char* cost_mode_name(CostMode m) { return m == CostMode::none ? "none" : m == CostMode::sleep ? "sleep" : "spin"; }

CostMode parse_cost_mode(const std::string& s) {
  if (s == "none") return CostMode::none;
  if (s == "sleep") return CostMode::sleep;
  if (s == "spin") return CostMode::spin;
  throw Error(Errc::invalid_argument, "config: unknown cost mode '" + s + "'");
}

}  // namespace

void to_json(Json& j, const PipelineConfig& c) {
  j = Json{{"format", "htcflow.config"}, {"version", kDocumentVersion}};
  j["output_dir"] = c.output_dir.string();
  j["rng_seed"] = c.rng_seed;
  Json faces = Json::array();
  for (const auto& f : c.faces) {
    Json jf{{"face_id", f.face_id},
            {"rows", f.rows},
            {"cols", f.cols},
            {"width", f.width},
            {"height", f.height},
            {"origin", {f.origin.x(), f.origin.y(), f.origin.z()}},
            {"normal_axis", axis_name(f.normal_axis)}};
    jf["phase"] = f.phase ? Json(*f.phase) : Json(nullptr);
    faces.push_back(std::move(jf));
  }
  j["faces"] = std::move(faces);
  j["case_grid"] = c.case_grid;
  j["surrogate"] = c.surrogate;
  j["ga"] = c.ga;
  j["m"] = c.m;
  Json mpf = Json::object();
  for (const auto& [face, m] : c.m_per_face) mpf[std::to_string(face)] = m;
  j["m_per_face"] = std::move(mpf);
  j["rbf"] = Json{{"kernel", c.rbf.kernel == rbf::Kernel::gaussian ? "gaussian" : "multiquadric"},
                  {"shape_eps", c.rbf.shape_eps ? Json(*c.rbf.shape_eps) : Json(nullptr)},
                  {"ridge", c.rbf.ridge}};
  j["cd"] = Json{{"lambda", c.cd_lambda}, {"axes", c.cd_axes ? Json(*c.cd_axes) : Json(nullptr)}};
  j["workers"] = c.workers ? Json(*c.workers) : Json(nullptr);
  j["setup_cost_s"] = c.setup_cost_s;
  j["probe_fraction"] = c.probe_fraction;
  j["cluster_cost"] = Json{{"mode", cost_mode_name(c.cluster_cost.mode)},
                           {"c0", c.cluster_cost.c0},
                           {"c1", c.cluster_cost.c1},
                           {"c2", c.cluster_cost.c2}};
}

void from_json(const Json& j, PipelineConfig& c) {
  try {
    if (j.contains("format") && j["format"] != "htcflow.config") {
      throw Error(Errc::malformed_header, "config: not an htcflow.config document");
    }
    c.output_dir = j.value("output_dir", c.output_dir.string());
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.faces.clear();
    for (const auto& jf : j.at("faces")) {
      FaceSpec f;
      f.face_id = jf.at("face_id").get<FaceId>();
      f.rows = jf.at("rows").get<int>();
      f.cols = jf.at("cols").get<int>();
      f.width = jf.at("width").get<double>();
      f.height = jf.at("height").get<double>();
      if (jf.contains("origin")) {
        const auto o = jf["origin"].get<std::vector<double>>();
        if (o.size() != 3) throw Error(Errc::invalid_argument, "config: origin needs 3 coordinates");
        f.origin = Point3(o[0], o[1], o[2]);
      }
      f.normal_axis = parse_axis(jf.value("normal_axis", std::string("z")));
      if (jf.contains("phase") && !jf["phase"].is_null()) f.phase = jf["phase"].get<std::int64_t>();
      c.faces.push_back(f);
    }
    c.case_grid = j.at("case_grid").get<CaseGrid>();
    if (j.contains("surrogate")) c.surrogate = j["surrogate"].get<SurrogateParams>();
    if (j.contains("ga")) c.ga = j["ga"].get<GAParams>();
    c.m = j.value("m", c.m);
    c.m_per_face.clear();
    if (j.contains("m_per_face")) {
      for (const auto& [key, value] : j["m_per_face"].items()) {
        c.m_per_face[std::stoll(key)] = value.get<std::size_t>();
      }
    }
    if (j.contains("rbf")) {
      const auto& r = j["rbf"];
      const auto kernel = r.value("kernel", std::string("gaussian"));
      if (kernel == "gaussian") c.rbf.kernel = rbf::Kernel::gaussian;
      else if (kernel == "multiquadric") c.rbf.kernel = rbf::Kernel::multiquadric;
      else throw Error(Errc::invalid_argument, "config: unknown kernel '" + kernel + "'");
      c.rbf.shape_eps.reset();
      if (r.contains("shape_eps") && !r["shape_eps"].is_null()) c.rbf.shape_eps = r["shape_eps"].get<double>();
      c.rbf.ridge = r.value("ridge", 0.0);
    }
    if (j.contains("cd")) {
      const auto& cd = j["cd"];
      c.cd_lambda = cd.value("lambda", c.cd_lambda);
      c.cd_axes.reset();
      if (cd.contains("axes") && !cd["axes"].is_null()) c.cd_axes = cd["axes"].get<CDAxes>();
    }
    c.workers.reset();
    if (j.contains("workers") && !j["workers"].is_null()) c.workers = j["workers"].get<int>();
    c.setup_cost_s = j.value("setup_cost_s", c.setup_cost_s);
    c.probe_fraction = j.value("probe_fraction", c.probe_fraction);
    if (j.contains("cluster_cost")) {
      const auto& cc = j["cluster_cost"];
      c.cluster_cost.mode = parse_cost_mode(cc.value("mode", std::string("none")));
      c.cluster_cost.c0 = cc.value("c0", 0.0);
      c.cluster_cost.c1 = cc.value("c1", 0.0);
      c.cluster_cost.c2 = cc.value("c2", 0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("config: ") + e.what());
  }
}

PipelineConfig load_config(const fs::path& path) {
  const std::string text = read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_header, path.string() + ": not valid JSON: " + e.what());
  }
  PipelineConfig c = j.get<PipelineConfig>();
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Files

void write_file_atomic(const fs::path& path, std::string_view text) {
  fs::path partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open " + partial.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(Errc::io, "write failed: " + partial.string());
  }
  std::error_code ec;
  fs::rename(partial, path, ec);
  if (ec) throw Error(Errc::io, "cannot rename " + partial.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_input, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".htcflow.lock") {
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw Error(Errc::io, "output directory " + dir.string() + " is locked by another command (" + path_.string() + ")");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Workspace {
  RunPaths paths;
  DirectoryLock lock;

  explicit Workspace(const PipelineConfig& config) : paths{prepare(config)}, lock(paths.root) {}

  static fs::path prepare(const PipelineConfig& config) {
    config.validate();
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw Error(Errc::io, "cannot create " + config.output_dir.string() + ": " + ec.message());
    return config.output_dir;
  }
};

std::vector<LoadCase> load_cases(const RunPaths& paths) {
  return parse_case_manifest(read_document(paths.manifest(), "htcflow.cases"));
}

std::vector<HTCField> load_fields(const RunPaths& paths, const Face& face, const std::vector<LoadCase>& cases) {
  std::vector<HTCField> fields;
  fields.reserve(cases.size());
  for (const auto& c : cases) fields.push_back(read_htc_csv(paths.field(face.face_id(), c.case_id), face));
  return fields;
}

const FaceSpec& spec_for(const PipelineConfig& config, FaceId id) {
  const auto it = std::find_if(config.faces.begin(), config.faces.end(), [&](const FaceSpec& f) { return f.face_id == id; });
  if (it == config.faces.end()) throw Error(Errc::invalid_argument, "unknown face " + std::to_string(id));
  return *it;
}

int resolve_workers(const PipelineConfig& config) { return config.workers.value_or(1); }

}  // namespace

CommandResult cmd_gen_cases(const PipelineConfig& config) {
  Workspace ws(config);
  const auto cases = enumerate_cases(config.case_grid);
  write_file_atomic(ws.paths.manifest(), dump_document(case_manifest_document(cases)));
  return {exit_status::ok, "wrote " + std::to_string(cases.size()) + " load cases to " + ws.paths.manifest().string()};
}

CommandResult cmd_simulate(const PipelineConfig& config) {
  Workspace ws(config);
  const auto cases = load_cases(ws.paths);
  const auto faces = config.build_faces();
  fs::create_directories(ws.paths.fields_dir());
  fs::create_directories(ws.paths.logs_dir());

  // One task per load case, exporting every face, as one CFD run per design point would.
  std::vector<WorkItem> tasks;
  tasks.reserve(cases.size());
  for (const auto& c : cases) {
    tasks.push_back({c.case_id, [&config, &faces, &ws, c] {
                       for (std::size_t f = 0; f < faces.size(); ++f) {
                         const auto field = synth_htc(faces[f], c, config.surrogate_for(config.faces[f]));
                         write_file_atomic(ws.paths.field(faces[f].face_id(), c.case_id),
                                           format_htc_csv(field, faces[f]));
                       }
                     }});
  }
  const RunLog log = run_parallel(std::move(tasks), resolve_workers(config), config.setup_cost_s);
  write_file_atomic(ws.paths.simulate_log(), format_run_log(log));

  std::ostringstream msg;
  msg << "simulated " << cases.size() << " load cases x " << faces.size() << " faces on " << log.n_workers
      << " worker(s): wall " << log.wall_clock_s << " s, sequential-equivalent " << log.sequential_equivalent_s
      << " s, speedup " << speedup(log);
  if (!log.complete) {
    msg << "\n" << log.failures() << " task(s) failed";
    for (const auto& e : log.entries)
      if (!e.ok) msg << "\n  case " << e.task_id << ": " << e.error;
    return {exit_status::partial, msg.str()};
  }
  return {exit_status::ok, msg.str()};
}

CommandResult cmd_cluster(const PipelineConfig& config) {
  Workspace ws(config);
  const auto cases = load_cases(ws.paths);
  const auto faces = config.build_faces();
  std::map<FaceId, std::vector<HTCField>> fields;
  for (const auto& face : faces) fields[face.face_id()] = load_fields(ws.paths, face, cases);
  fs::create_directories(ws.paths.subsets_dir());
  fs::create_directories(ws.paths.logs_dir());

  auto cluster_face = [&](const Face& face) {
    const GAParams params = config.ga_for(face.face_id());
    auto result = two_stage_cluster(face, fields.at(face.face_id()), config.m_for(face.face_id()), params, config.rbf);
    burn(config.cluster_cost.mode, config.cluster_cost.seconds(face.size()));
    return std::make_pair(std::move(result), params);
  };
  auto face_by_id = [&](FaceId id) -> const Face& {
    return *std::find_if(faces.begin(), faces.end(), [&](const Face& f) { return f.face_id() == id; });
  };

  std::vector<FaceWork> work;
  for (const auto& face : faces) work.push_back({face.face_id(), face.size()});
  const MeasuredBalance balanced = measure_and_balance(work, config.probe_fraction, [&](const FaceWork& w) {
    const auto start = std::chrono::steady_clock::now();
    cluster_face(face_by_id(w.face_id));
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  std::map<std::int64_t, std::function<void()>> bodies;
  for (const auto& face : faces) {
    bodies[face.face_id()] = [&, id = face.face_id()] {
      const auto [result, params] = cluster_face(face_by_id(id));
      write_file_atomic(ws.paths.subset(id), dump_document(subset_document(result.final_subset, params)));
    };
  }
  const RunLog log = run_schedule(balanced.schedule, bodies, 0.0);
  write_file_atomic(ws.paths.cluster_log(), format_run_log(log));

  std::vector<double> measured(balanced.schedule.n_bins(), 0.0);
  for (const auto& [worker, seconds] : log.worker_compute()) measured.at(static_cast<std::size_t>(worker)) = seconds;
  write_file_atomic(ws.paths.schedule(), dump_document(schedule_document(balanced, measured)));

  std::ostringstream msg;
  msg << "clustered " << faces.size() << " faces in " << balanced.schedule.n_bins() << " bin(s):";
  for (std::size_t b = 0; b < balanced.schedule.n_bins(); ++b) {
    msg << "\n  bin " << b << ":";
    for (auto id : balanced.schedule.bins[b]) msg << ' ' << id;
    msg << "  (estimated " << balanced.schedule.bin_loads[b] << " s, measured " << measured[b] << " s)";
  }
  const double max_bin = measured.empty() ? 0.0 : *std::max_element(measured.begin(), measured.end());
  if (max_bin > 0.0) msg << "\n  speedup " << log.sequential_equivalent_s / max_bin;
  if (!log.complete) {
    for (const auto& e : log.entries)
      if (!e.ok) msg << "\n  face " << e.task_id << " failed: " << e.error;
    return {exit_status::partial, msg.str()};
  }
  return {exit_status::ok, msg.str()};
}

CommandResult cmd_train_cd(const PipelineConfig& config) {
  Workspace ws(config);
  const auto cases = load_cases(ws.paths);
  const auto faces = config.build_faces();
  const CDAxes axes = config.axes();
  fs::create_directories(ws.paths.cd_dir());

  Json report = Json{{"format", "htcflow.cd_report"}, {"version", kDocumentVersion}};
  Json per_face = Json::array();
  std::size_t total = 0;
  for (const auto& face : faces) {
    const auto record = parse_subset_document(read_document(ws.paths.subset(face.face_id()), "htcflow.subset"));
    FieldsByFace by_face;
    for (auto& field : load_fields(ws.paths, face, cases)) by_face[face.face_id()][field.case_id] = std::move(field);
    std::vector<CDTrainReport> reports;
    const std::vector<NodeSubset> subsets{record.subset};
    const auto grids = train_all(subsets, by_face, cases, axes, config.cd_lambda, &reports);
    write_file_atomic(ws.paths.cd_set(face.face_id()), dump_document(cd_set_document(face.face_id(), grids)));
    double residual = 0.0;
    std::size_t clamped = 0;
    for (const auto& r : reports) {
      residual = std::max(residual, r.max_residual);
      clamped += r.clamped_samples;
    }
    per_face.push_back(Json{{"face_id", face.face_id()}, {"diagrams", grids.size()}, {"max_residual", residual},
                            {"clamped_samples", clamped}});
    total += grids.size();
  }
  report["faces"] = std::move(per_face);
  write_file_atomic(ws.paths.cd_dir() / "training_report.json", dump_document(report));
  return {exit_status::ok, "trained " + std::to_string(total) + " characteristic diagrams"};
}

QueryOutcome run_query(const PipelineConfig& config, const QueryRequest& request) {
  config.validate();
  RunPaths paths{config.output_dir};
  const FaceSpec& spec = spec_for(config, request.face_id);
  const Face face = gen_rect_face(spec.face_id, spec.rows, spec.cols, spec.width, spec.height, spec.origin,
                                  spec.normal_axis);
  const auto cases = load_cases(paths);
  const auto record = parse_subset_document(read_document(paths.subset(face.face_id()), "htcflow.subset"));
  const auto grids = parse_cd_set_document(read_document(paths.cd_set(face.face_id()), "htcflow.cd_set"));

  LoadCase load_case{-1, request.t_air, request.v, request.az, request.el};
  load_case.validate();
  QueryOutcome out;
  for (const auto& c : cases) {
    if (c.same_conditions(load_case)) {
      out.training_case = c.case_id;
      load_case.case_id = c.case_id;
      break;
    }
  }
  out.reconstruction = reconstruct_face_detailed(face, record.subset, grids, load_case, config.rbf);
  if (out.training_case) {
    const HTCField truth = read_htc_csv(paths.field(face.face_id(), *out.training_case), face);
    for (std::size_t i = 0; i < face.size(); ++i) {
      out.max_nodal_error = std::max(out.max_nodal_error, std::abs(out.reconstruction.field.values[i] - truth.values[i]));
    }
    out.stage2_fitness = record.subset.fitness.value_or(std::numeric_limits<double>::infinity());
    std::vector<double> delta;
    for (std::size_t k = 0; k < record.subset.members.size(); ++k) {
      delta.push_back(out.reconstruction.subset_values[k] - truth.values[record.subset.members[k]]);
      out.cd_residual_raw = std::max(out.cd_residual_raw, std::abs(delta.back()));
    }
    const auto carried = rbf::fit(face.positions(record.subset.members), delta, config.rbf.fit_options());
    for (double d : carried.eval(face.positions())) out.cd_residual = std::max(out.cd_residual, std::abs(d));
    out.within_bound = out.max_nodal_error <= out.stage2_fitness + out.cd_residual + 1e-6;
  }
  return out;
}

CommandResult cmd_query(const PipelineConfig& config, const QueryRequest& request) {
  Workspace ws(config);
  const QueryOutcome q = run_query(config, request);
  fs::create_directories(ws.paths.query_dir());
  const FaceSpec& spec = spec_for(config, request.face_id);
  const Face face = gen_rect_face(spec.face_id, spec.rows, spec.cols, spec.width, spec.height, spec.origin,
                                  spec.normal_axis);
  const std::string stem = "face_" + std::to_string(request.face_id) + "_query";
  write_file_atomic(ws.paths.query_dir() / (stem + ".csv"), format_htc_csv(q.reconstruction.field, face));

  Json report{{"format", "htcflow.query_report"}, {"version", kDocumentVersion}};
  report["face_id"] = request.face_id;
  report["load_case"] = Json{{"t_air", request.t_air}, {"v", request.v}, {"az", request.az}, {"el", request.el}};
  report["extrapolated"] = q.reconstruction.extrapolated;
  report["training_case"] = q.training_case ? Json(*q.training_case) : Json(nullptr);
  if (q.training_case) {
    report["max_nodal_error"] = q.max_nodal_error;
    report["stage2_fitness"] = q.stage2_fitness;
    report["cd_residual"] = q.cd_residual;
    report["cd_residual_raw"] = q.cd_residual_raw;
    report["within_bound"] = q.within_bound;
  }
  write_file_atomic(ws.paths.query_dir() / (stem + ".json"), dump_document(report));

  std::ostringstream msg;
  msg << "reconstructed face " << request.face_id << " (" << face.size() << " nodes) -> "
      << (ws.paths.query_dir() / (stem + ".csv")).string();
  if (q.reconstruction.extrapolated) msg << "\nwarning: load case outside the trained range; clamped (extrapolation)";
  if (q.training_case) {
    msg << "\ntraining case " << *q.training_case << ": max nodal error " << q.max_nodal_error
        << " <= stage-2 fitness " << q.stage2_fitness << " + CD residual " << q.cd_residual << " : "
        << (q.within_bound ? "yes" : "NO");
  }
  return {exit_status::ok, msg.str()};
}

CommandResult cmd_report(const PipelineConfig& config) {
  Workspace ws(config);
  const bool have_sim = fs::exists(ws.paths.simulate_log());
  const bool have_cluster = fs::exists(ws.paths.cluster_log());
  if (!have_sim && !have_cluster) {
    throw Error(Errc::missing_input, "no logs in " + ws.paths.logs_dir().string() + "; run simulate or cluster first");
  }
  fs::create_directories(ws.paths.report_dir());
  std::ostringstream summary;
  summary.precision(6);
  if (have_sim) {
    const RunLog log = parse_run_log(read_file(ws.paths.simulate_log()));
    std::string table = "task_id,worker,wait_s,setup_s,compute_s\n";
    double setup_total = 0.0;
    double min_compute = std::numeric_limits<double>::infinity();
    double max_compute = 0.0;
    for (const auto& e : log.entries) {
      table += std::to_string(e.task_id) + ',' + std::to_string(e.worker_id) + ',' + format_double17(e.wait_s) + ',' +
               format_double17(e.setup_s) + ',' + format_double17(e.compute_s) + '\n';
      setup_total += e.setup_s;
      min_compute = std::min(min_compute, e.compute_s);
      max_compute = std::max(max_compute, e.compute_s);
    }
    write_file_atomic(ws.paths.report_dir() / "simulate_phases.csv", table);
    summary << "simulate: tasks=" << log.entries.size() << " workers=" << log.n_workers
            << " sequential_equivalent_s=" << log.sequential_equivalent_s << " wall_clock_s=" << log.wall_clock_s
            << " speedup=" << (log.wall_clock_s > 0 ? log.sequential_equivalent_s / log.wall_clock_s : 0.0) << "\n";
    summary << "simulate: setup_total_s=" << setup_total << " (" << 100.0 * setup_total / std::max(log.sequential_equivalent_s, 1e-300)
            << "% of compute) compute_min_s=" << min_compute << " compute_max_s=" << max_compute << "\n";
  }
  if (have_cluster) {
    const RunLog log = parse_run_log(read_file(ws.paths.cluster_log()));
    std::map<int, double> bins = log.worker_compute();
    std::string table = "bin,faces,measured_s\n";
    std::map<int, std::string> faces;
    for (const auto& e : log.entries) {
      auto& f = faces[e.worker_id];
      if (!f.empty()) f += ' ';
      f += std::to_string(e.task_id);
    }
    double max_bin = 0.0;
    for (const auto& [bin, seconds] : bins) {
      table += std::to_string(bin) + ',' + faces[bin] + ',' + format_double17(seconds) + '\n';
      max_bin = std::max(max_bin, seconds);
    }
    write_file_atomic(ws.paths.report_dir() / "cluster_bins.csv", table);
    summary << "cluster: faces=" << log.entries.size() << " bins=" << bins.size()
            << " sum_face_runtime_s=" << log.sequential_equivalent_s << " max_bin_runtime_s=" << max_bin
            << " wall_clock_s=" << log.wall_clock_s
            << " speedup=" << (max_bin > 0 ? log.sequential_equivalent_s / max_bin : 0.0) << "\n";
  }
  write_file_atomic(ws.paths.report_dir() / "summary.txt", summary.str());
  return {exit_status::ok, summary.str()};
}

}  // namespace htc
