#pragma once

#include <string>

#include "gnids/config.hpp"
#include "gnids/report.hpp"

namespace gnids {

/// On-disk layout of one experiment directory. Every intermediate artifact
/// is versioned and self-describing; stages refuse inputs with the wrong
/// artifact kind or version.
struct StagePaths {
  std::string dir;

  std::string records_csv() const { return dir + "/records.csv"; }
  std::string records_meta() const { return dir + "/records.meta"; }
  std::string split_dir() const { return dir + "/split"; }
  std::string train_csv() const { return dir + "/split/train.csv"; }
  std::string test_csv() const { return dir + "/split/test.csv"; }
  std::string split_meta() const { return dir + "/split/meta.txt"; }
  std::string norm_params() const { return dir + "/norm.params"; }
  std::string models_dir() const { return dir + "/models"; }
  std::string model_file(const std::string& name) const {
    return dir + "/models/" + name + ".model";
  }
  std::string trainlog_file(const std::string& name) const {
    return dir + "/models/" + name + ".trainlog";
  }
  std::string attacks_dir() const { return dir + "/attacks"; }
  std::string report_data() const { return dir + "/report_data.txt"; }
};

// Pipeline stages, independently invocable. Each consumes the previous
// stage's serialized artifacts; attacks always perturb raw netflow sets
// before test-graph construction.
void stage_ingest(const ExperimentConfig& config, const StagePaths& paths);
void stage_split(const ExperimentConfig& config, const StagePaths& paths);
void stage_train(const ExperimentConfig& config, const StagePaths& paths);
void stage_attack(const ExperimentConfig& config, const StagePaths& paths);
void stage_evaluate(const ExperimentConfig& config, const StagePaths& paths);
void stage_report(const ExperimentConfig& config, const StagePaths& paths);

/// Full pipeline: ingest, split, train, attack, evaluate, report.
/// `through_stage` (empty = all) stops after the named stage. Returns the
/// final report when evaluation ran.
ExperimentReport run_experiment(const ExperimentConfig& config, const std::string& through_stage = "");

}  // namespace gnids
