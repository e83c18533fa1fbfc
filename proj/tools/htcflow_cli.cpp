// htcflow: generate HTC fields, cluster optimal nodes, train diagrams, reconstruct faces.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "htcflow/error.hpp"
#include "htcflow/pipeline.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

htc::PipelineConfig resolve(const Overrides& o) {
  htc::PipelineConfig config = htc::load_config(o.config_path);
  if (o.workers) {
    config.workers = *o.workers;
  } else if (const char* env = std::getenv("HTCFLOW_WORKERS"); env && *env) {
    try {
      config.workers = std::stoi(env);
    } catch (const std::exception&) {
      throw htc::Error(htc::Errc::invalid_argument, std::string("HTCFLOW_WORKERS is not an integer: ") + env);
    }
  }
  if (o.seed) config.rng_seed = *o.seed;
  if (o.out) config.output_dir = *o.out;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"htcflow: HTC field surrogates on optimal node subsets"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config_path, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--workers", o.workers, "worker threads (default: $HTCFLOW_WORKERS, config, 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "override rng_seed");
  app.add_option("--out", o.out, "override output_dir");

  auto* gen = app.add_subcommand("gen-cases", "write the load-case manifest");
  auto* sim = app.add_subcommand("simulate", "synthesize HTC fields for every face and case");
  auto* clu = app.add_subcommand("cluster", "balance and run the two-stage GA per face");
  auto* cd = app.add_subcommand("train-cd", "train one characteristic diagram per optimal node");
  auto* qry = app.add_subcommand("query", "reconstruct a face for one load case");
  auto* rep = app.add_subcommand("report", "summarize run logs");

  htc::QueryRequest request;
  qry->add_option("--face", request.face_id, "face id")->required();
  qry->add_option("--t", request.t_air, "air temperature, degC")->required();
  qry->add_option("--v", request.v, "speed, m/s")->required();
  qry->add_option("--az", request.az, "azimuth, deg");
  qry->add_option("--el", request.el, "elevation, deg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : htc::exit_status::validation;
  }

  try {
    const htc::PipelineConfig config = resolve(o);
    htc::CommandResult result;
    if (*gen) result = htc::cmd_gen_cases(config);
    else if (*sim) result = htc::cmd_simulate(config);
    else if (*clu) result = htc::cmd_cluster(config);
    else if (*cd) result = htc::cmd_train_cd(config);
    else if (*qry) result = htc::cmd_query(config, request);
    else if (*rep) result = htc::cmd_report(config);
    (result.exit_code == 0 ? std::cout : std::cerr) << result.message << '\n';
    return result.exit_code;
  } catch (const htc::Error& e) {
    std::cerr << "error [" << htc::to_string(e.code()) << "]: " << e.what() << '\n';
    return htc::exit_status::validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return htc::exit_status::validation;
  }
}
