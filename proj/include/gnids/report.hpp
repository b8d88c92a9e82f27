#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gnids/metrics.hpp"
#include "gnids/sweep.hpp"

namespace gnids {

/// Self-contained experiment outcome: everything needed to rerun (config
/// echo, seeds) plus baseline metrics and detection-rate curves. Runtime
/// accounting is carried here but emitted to a separate timings file so the
/// deterministic outputs stay byte-stable across reruns.
struct ExperimentReport {
  std::string dataset_id;
  uint64_t split_seed = 0;
  std::string config_text;
  std::vector<std::pair<std::string, Metrics>> baseline;
  std::vector<DRCurve> curves;
  std::vector<FeatureVariantOutcome> feature_variants;
  std::vector<std::pair<std::string, double>> stage_seconds;
};

/// Writes report.txt, per-curve CSVs under curves/, SVG plots under plots/,
/// feature_variants.csv when present, and timings.txt. All files except
/// timings.txt are byte-stable given an identical report. Files are written
/// atomically (temp then rename).
void emit_report(const ExperimentReport& report, const std::string& out_dir);

/// Machine round-trip of the report (minus timings), used between the
/// evaluate and report pipeline stages.
void save_report_data(const std::string& path, const ExperimentReport& report);
ExperimentReport load_report_data(const std::string& path);

}  // namespace gnids
