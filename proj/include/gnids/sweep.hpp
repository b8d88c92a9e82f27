#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gnids/attacks.hpp"
#include "gnids/forest.hpp"
#include "gnids/metrics.hpp"
#include "gnids/preprocess.hpp"
#include "gnids/sage.hpp"
#include "gnids/split.hpp"

namespace gnids {

/// Detection rate of one model against one attack over its parameter grid.
/// The point at parameter 0 is the unattacked baseline.
struct DRCurve {
  std::string attack_name;
  std::string model_name;
  std::string group_tag;  // e.g. "gamma=5" for add-node curves, else empty
  double baseline_dr = 0.0;
  std::vector<std::pair<double, double>> points;  // (parameter, detection rate), ascending
};

/// DR of every model on one feature-attack variant.
struct FeatureVariantOutcome {
  std::string group_name;
  double step = 0.0;
  std::vector<std::pair<std::string, double>> dr_by_model;
};

struct TrainedModels {
  bool has_edge = false, has_node = false, has_rf = false;
  SageModel edge_model;
  SageModel node_model;
  Forest rf;
  NormalizationParams norm;
};

struct SweepGrids {
  std::vector<int> beta{1, 2, 5, 10, 20};
  std::vector<int> theta{1, 2, 5, 10, 20};
  std::vector<int> eta{1, 5, 10, 100, 1000};
  std::vector<int> gamma{1, 5, 20};
  std::vector<double> feature_steps = default_feature_steps();
  bool run_feature = true;
  bool run_c2x_benign = true;
  bool run_c2x_malicious = true;
  bool run_add_node = true;
  uint64_t seed = 0;
};

struct SweepResult {
  std::vector<DRCurve> curves;
  std::vector<FeatureVariantOutcome> feature_variants;
  std::vector<std::pair<std::string, Metrics>> baseline;  // clean-test metrics per model
};

/// Runs every enabled attack over its grid: perturb the raw test records,
/// re-normalize, rebuild the flow graph (and line graph for the node
/// model), run inference, and record DR over the ORIGINAL malicious records
/// only - added records never enter the DR numerator or denominator.
/// Structural attacks target the GNN models; the feature attack also runs
/// against the random forest.
SweepResult run_attack_sweep(const TrainedModels& models, const DatasetSplit& split,
                             const SweepGrids& grids);

/// DR over the first n_original predictions, restricted to malicious labels.
double detection_rate_on_originals(const std::vector<Label>& predictions,
                                   const std::vector<Label>& original_labels);

}  // namespace gnids
