#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gnids/forest.hpp"
#include "gnids/sage.hpp"
#include "gnids/sweep.hpp"
#include "gnids/synth.hpp"

namespace gnids {

/// Experiment definition parsed from a sectioned key=value file. The raw
/// text is kept for provenance in the report.
struct ExperimentConfig {
  // [dataset]
  std::string dataset_kind = "synth";  // synth | csv
  std::string csv_path;
  std::string schema_name = "generic";  // builtin name or file:<path>
  std::string attack_name = "scan";
  std::vector<int> categorical_extras;  // csv datasets: extra indices to one-hot

  // [synth]
  SynthConfig synth;

  // [split]
  double train_frac = 0.8;
  int benign_ratio = 10;
  uint64_t split_seed = 7;

  // [egraphsage] / [linegraphsage] / [rf]
  bool egraphsage_enabled = true;
  SageConfig egraphsage;
  bool linegraphsage_enabled = true;
  SageConfig linegraphsage;
  bool rf_enabled = true;
  ForestConfig rf;

  // [attacks]
  SweepGrids grids;

  // [output]
  std::string out_dir = "out";

  std::string raw_text;  // config file echo
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig parse_config_file(const std::string& path);

/// Rejects broken configs before any compute: missing files, non-positive
/// counts, and grid values outside the published grids unless
/// allow_grid_override is set.
void validate_config(const ExperimentConfig& config, bool allow_grid_override);

/// Re-derives every seed in the config from one master seed.
void apply_master_seed(ExperimentConfig& config, uint64_t master);

}  // namespace gnids
