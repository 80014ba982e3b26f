#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "carbonx/error.hpp"
#include "carbonx/pipeline.hpp"

namespace {

void print_error_json(const std::string& kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

const char* kind_name(carbonx::ErrorKind k) {
  switch (k) {
    case carbonx::ErrorKind::Config:
      return "config";
    case carbonx::ErrorKind::Data:
      return "data";
    case carbonx::ErrorKind::Numeric:
      return "numeric";
  }
  return "unknown";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"carbon-cycle extremes pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  bool svg = false;
  app.add_option("--config", config_path, "run (or synth) config JSON")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads");
  app.add_flag("--svg", svg, "emit SVG diagnostics");

  std::optional<std::uint64_t> seed_override;
  std::uint64_t seed_value = 0;
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic inputs");
  synth_cmd->fallthrough();
  synth_cmd->add_option("--seed", seed_value, "override the config seed");

  app.add_subcommand("decompose", "trend / annual-cycle / anomaly split")->fallthrough();
  app.add_subcommand("extremes", "window thresholds and intensity series")->fallthrough();
  app.add_subcommand("tce", "time-continuous extreme events")->fallthrough();
  app.add_subcommand("attribute", "lagged driver attribution")->fallthrough();
  app.add_subcommand("compound", "compound driver fractions")->fallthrough();
  app.add_subcommand("regions", "regional budgets and diagnostics")->fallthrough();
  app.add_subcommand("sensitivity", "decadal temperature sensitivity")->fallthrough();
  app.add_subcommand("pipeline", "run all stages")->fallthrough();

  std::string truth_path;
  auto* score_cmd = app.add_subcommand("scorecard", "compare artifacts to ground truth");
  score_cmd->fallthrough();
  score_cmd->add_option("--truth", truth_path, "ground-truth JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error_json("config", e.what());
    return 2;
  }

  try {
    const std::string sub = app.get_subcommands().front()->get_name();
    carbonx::pipeline::Options opt{out_dir, threads, svg};
    if (sub == "synth") {
      if (synth_cmd->count("--seed") > 0) seed_override = seed_value;
      carbonx::pipeline::cmd_synth(config_path, opt, seed_override);
      return 0;
    }
    const auto cfg = carbonx::pipeline::RunConfig::load(config_path);
    if (sub == "decompose")
      carbonx::pipeline::cmd_decompose(cfg, opt);
    else if (sub == "extremes")
      carbonx::pipeline::cmd_extremes(cfg, opt);
    else if (sub == "tce")
      carbonx::pipeline::cmd_tce(cfg, opt);
    else if (sub == "attribute")
      carbonx::pipeline::cmd_attribute(cfg, opt);
    else if (sub == "compound")
      carbonx::pipeline::cmd_compound(cfg, opt);
    else if (sub == "regions")
      carbonx::pipeline::cmd_regions(cfg, opt);
    else if (sub == "sensitivity")
      carbonx::pipeline::cmd_sensitivity(cfg, opt);
    else if (sub == "pipeline")
      carbonx::pipeline::cmd_pipeline(cfg, opt);
    else if (sub == "scorecard")
      carbonx::pipeline::cmd_scorecard(cfg, opt, truth_path);
  } catch (const carbonx::Error& e) {
    print_error_json(kind_name(e.kind()), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    print_error_json("data", e.what());
    return 3;
  }
  return 0;
}
