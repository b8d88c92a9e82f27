#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gnids/config.hpp"
#include "gnids/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "gnids - flow-graph intrusion detectors (E-GraphSAGE, LineGraphSAGE, random forest) "
      "under structural and feature adversarial attacks"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string stage;
  uint64_t master_seed = 0;
  bool override_grids = false;
  app.add_option("--config", config_path, "experiment config file")->required();
  app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
  auto* seed_opt =
      app.add_option("--seed", master_seed, "master seed; re-derives every configured seed");
  app.add_flag("--override-grids", override_grids,
               "allow grid values outside the published attack grids");

  auto* cmd_ingest = app.add_subcommand("ingest", "load or synthesize the dataset");
  auto* cmd_split = app.add_subcommand("split", "make the train/test split");
  auto* cmd_train = app.add_subcommand("train", "fit normalization and train enabled models");
  auto* cmd_attack = app.add_subcommand("attack", "export attacked netflow sets per grid point");
  auto* cmd_evaluate = app.add_subcommand("evaluate", "run attack sweeps against trained models");
  auto* cmd_report = app.add_subcommand("report", "render report files from evaluation output");
  auto* cmd_run = app.add_subcommand("run", "full pipeline");
  cmd_run->add_option("--stage", stage, "stop after this stage");

  CLI11_PARSE(app, argc, argv);

  std::string active = "cli";
  try {
    gnids::ExperimentConfig cfg = gnids::parse_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_opt->count() > 0) gnids::apply_master_seed(cfg, master_seed);
    gnids::validate_config(cfg, override_grids);

    gnids::StagePaths paths{cfg.out_dir};
    if (cmd_run->parsed()) {
      active = "run";
      gnids::run_experiment(cfg, stage);
    } else if (cmd_ingest->parsed()) {
      active = "ingest";
      gnids::stage_ingest(cfg, paths);
    } else if (cmd_split->parsed()) {
      active = "split";
      gnids::stage_split(cfg, paths);
    } else if (cmd_train->parsed()) {
      active = "train";
      gnids::stage_train(cfg, paths);
    } else if (cmd_attack->parsed()) {
      active = "attack";
      gnids::stage_attack(cfg, paths);
    } else if (cmd_evaluate->parsed()) {
      active = "evaluate";
      gnids::stage_evaluate(cfg, paths);
    } else if (cmd_report->parsed()) {
      active = "report";
      gnids::stage_report(cfg, paths);
    }
  } catch (const std::exception& e) {
    std::cerr << "[" << active << "] error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
