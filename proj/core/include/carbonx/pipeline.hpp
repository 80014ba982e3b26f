#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carbonx/attribution.hpp"
#include "carbonx/extremes.hpp"
#include "carbonx/gridstore.hpp"
#include "carbonx/synth.hpp"

namespace carbonx::pipeline {

// JSON run configuration shared by all subcommands.
struct RunConfig {
  struct Inputs {
    std::string nbp;
    std::string prcp, sm, tas, fire;
    std::string region_mask, region_table;  // GridStack container + JSON table
    std::string region_rects;               // rectangle-list fallback
  } inputs;
  int window_start_year = 1850;
  int window_length_years = 25;
  int window_count = 10;
  int ssa_window = 120;
  std::vector<int> lags = {0, 1, 2, 3, 4};
  double tau = 0.6;
  double p_max = 0.05;
  int sensitivity_start_year = 1850;
  int sensitivity_n_decades = 10;
  std::vector<double> quantile_levels = {0.10, 0.50, 0.90};

  static RunConfig parse(const std::string& json_text);
  static RunConfig load(const std::string& path);
};

struct Options {
  std::string out_dir = ".";
  int threads = 1;
  bool svg = false;
};

void cmd_decompose(const RunConfig& cfg, const Options& opt);
void cmd_extremes(const RunConfig& cfg, const Options& opt);
void cmd_tce(const RunConfig& cfg, const Options& opt);
void cmd_attribute(const RunConfig& cfg, const Options& opt);
void cmd_compound(const RunConfig& cfg, const Options& opt);
void cmd_regions(const RunConfig& cfg, const Options& opt);
void cmd_sensitivity(const RunConfig& cfg, const Options& opt);
void cmd_pipeline(const RunConfig& cfg, const Options& opt);

// Generate synthetic inputs plus a ready-to-run run config in out_dir.
void cmd_synth(const std::string& synth_config_path, const Options& opt,
               std::optional<std::uint64_t> seed_override);

// Compare pipeline artifacts in out_dir against a ground-truth file.
synth::Scorecard cmd_scorecard(const RunConfig& cfg, const Options& opt,
                               const std::string& truth_path);

// Artifact readers used by the scorecard and by tests.
synth::PipelineResults gather_results(const RunConfig& cfg, const std::string& out_dir,
                                      const synth::GroundTruth& truth);

}  // namespace carbonx::pipeline
