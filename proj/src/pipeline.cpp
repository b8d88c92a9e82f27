#include "gnids/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gnids/attacks.hpp"
#include "gnids/graph.hpp"
#include "gnids/preprocess.hpp"
#include "gnids/rng.hpp"
#include "gnids/split.hpp"
#include "gnids/synth.hpp"

namespace fs = std::filesystem;

namespace gnids {

namespace {

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void expect_artifact(const std::string& path, const std::string& kind) {
  std::string line = first_line(path);
  std::string want = "# gnids " + kind + " v1";
  if (line != want)
    throw std::runtime_error(path + ": expected artifact '" + want + "', found '" + line +
                             "' (incompatible or foreign input)");
}

std::string dataset_id_of(const ExperimentConfig& cfg) {
  if (cfg.dataset_kind == "synth")
    return "synth:" + std::string(to_string(cfg.synth.attack_pattern));
  return "csv:" + fs::path(cfg.csv_path).filename().string();
}

struct RecordsMeta {
  std::string dataset_id;
  std::vector<ExtraColumnInfo> extras;
  std::vector<int> categorical_indices() const {
    std::vector<int> out;
    for (size_t i = 0; i < extras.size(); ++i)
      if (extras[i].is_categorical) out.push_back(static_cast<int>(i));
    return out;
  }
};

void save_records_meta(const std::string& path, const RecordsMeta& meta) {
  std::ofstream out(path + ".tmp");
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "gnids-records-meta v1\n";
  out << "dataset_id " << meta.dataset_id << '\n';
  out << "extras " << meta.extras.size() << '\n';
  for (const auto& e : meta.extras) {
    out << e.name << (e.is_categorical ? " categorical" : " numeric");
    for (const auto& c : e.categories) out << ' ' << c;
    out << '\n';
  }
  out.close();
  fs::rename(path + ".tmp", path);
}

RecordsMeta load_records_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, version, key;
  in >> tag >> version;
  if (tag != "gnids-records-meta" || version != "v1")
    throw std::runtime_error(path + ": not a gnids-records-meta v1 file");
  RecordsMeta meta;
  size_t n = 0;
  in >> key >> meta.dataset_id;
  in >> key >> n;
  std::string line;
  std::getline(in, line);
  for (size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated extras");
    std::istringstream ls(line);
    ExtraColumnInfo e;
    std::string kind;
    ls >> e.name >> kind;
    e.is_categorical = kind == "categorical";
    std::string cat;
    while (ls >> cat) e.categories.push_back(cat);
    meta.extras.push_back(std::move(e));
  }
  return meta;
}

// Artifact CSVs keep categorical extras as numeric codes so train/test
// reload with a consistent encoding; only names are carried over.
std::vector<ExtraColumnInfo> names_only(const std::vector<ExtraColumnInfo>& extras) {
  std::vector<ExtraColumnInfo> out = extras;
  for (auto& e : out) {
    e.is_categorical = false;
    e.categories.clear();
  }
  return out;
}

Dataset load_artifact_records(const std::string& path, const std::string& kind) {
  expect_artifact(path, kind);
  return load_csv(path, builtin_schema("generic"));
}

struct SplitMeta {
  std::string attack_name;
  uint64_t seed = 0;
  double train_frac = 0.8;
  int benign_ratio = 10;
};

void save_split_meta(const std::string& path, const SplitMeta& m) {
  std::ofstream out(path + ".tmp");
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "gnids-split v1\n";
  out << "attack_name " << (m.attack_name.empty() ? "-" : m.attack_name) << '\n';
  out << "seed " << m.seed << '\n';
  out << "train_frac " << format_double(m.train_frac) << '\n';
  out << "benign_ratio " << m.benign_ratio << '\n';
  out.close();
  fs::rename(path + ".tmp", path);
}

SplitMeta load_split_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, version, key;
  in >> tag >> version;
  if (tag != "gnids-split" || version != "v1")
    throw std::runtime_error(path + ": not a gnids-split v1 file");
  SplitMeta m;
  in >> key >> m.attack_name;
  if (m.attack_name == "-") m.attack_name.clear();
  in >> key >> m.seed;
  in >> key >> m.train_frac;
  in >> key >> m.benign_ratio;
  if (!in) throw std::runtime_error(path + ": parse error");
  return m;
}

DatasetSplit load_split(const StagePaths& paths) {
  SplitMeta meta = load_split_meta(paths.split_meta());
  DatasetSplit split;
  split.train = load_artifact_records(paths.train_csv(), "split-train").records;
  split.test = load_artifact_records(paths.test_csv(), "split-test").records;
  split.attack_name = meta.attack_name;
  split.seed = meta.seed;
  return split;
}

void save_trainlog(const std::string& path, const TrainReport& report) {
  std::ofstream out(path + ".tmp");
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "gnids-trainlog v1\n";
  out << "final " << format_double(report.final_train_metrics.f1) << ' '
      << format_double(report.final_train_metrics.recall) << ' '
      << format_double(report.final_train_metrics.precision) << '\n';
  out << "epochs " << report.epoch_loss.size() << '\n';
  for (double l : report.epoch_loss) out << format_double(l) << '\n';
  out.close();
  fs::rename(path + ".tmp", path);
}

TrainedModels load_models(const ExperimentConfig& cfg, const StagePaths& paths) {
  TrainedModels models;
  models.norm = load_normalization(paths.norm_params());
  if (cfg.egraphsage_enabled) {
    models.edge_model = load_sage_model(paths.model_file("egraphsage"));
    models.has_edge = true;
  }
  if (cfg.linegraphsage_enabled) {
    models.node_model = load_sage_model(paths.model_file("linegraphsage"));
    models.has_node = true;
  }
  if (cfg.rf_enabled) {
    models.rf = load_forest(paths.model_file("rf"));
    models.has_rf = true;
  }
  return models;
}

}  // namespace

void stage_ingest(const ExperimentConfig& cfg, const StagePaths& paths) {
  fs::create_directories(paths.dir);
  RecordsMeta meta;
  meta.dataset_id = dataset_id_of(cfg);
  std::vector<NetflowRecord> records;
  if (cfg.dataset_kind == "synth") {
    records = synth_generate(cfg.synth);
    meta.extras.push_back({"flag_ratio", false, {}});
    meta.extras.push_back({"jitter", false, {}});
  } else {
    Schema schema = cfg.schema_name.rfind("file:", 0) == 0
                        ? load_schema_file(cfg.schema_name.substr(5))
                        : builtin_schema(cfg.schema_name);
    Dataset ds = load_csv(cfg.csv_path, schema);
    if (ds.records.empty())
      throw std::runtime_error("ingest: dataset " + cfg.csv_path + " has no data rows");
    records = std::move(ds.records);
    meta.extras = ds.extra_columns;
    for (int idx : cfg.categorical_extras) {
      if (idx < 0 || idx >= static_cast<int>(meta.extras.size()))
        throw std::runtime_error("ingest: categorical_extras index out of range");
      meta.extras[idx].is_categorical = true;
    }
  }
  validate_records(records);
  write_csv(paths.records_csv(), records, names_only(meta.extras), "records");
  save_records_meta(paths.records_meta(), meta);
}

void stage_split(const ExperimentConfig& cfg, const StagePaths& paths) {
  RecordsMeta meta = load_records_meta(paths.records_meta());
  Dataset ds = load_artifact_records(paths.records_csv(), "records");
  DatasetSplit split =
      make_split(ds.records, cfg.attack_name, cfg.train_frac, cfg.benign_ratio, cfg.split_seed);
  fs::create_directories(paths.split_dir());
  write_csv(paths.train_csv(), split.train, names_only(meta.extras), "split-train");
  write_csv(paths.test_csv(), split.test, names_only(meta.extras), "split-test");
  save_split_meta(paths.split_meta(),
                  {cfg.attack_name, cfg.split_seed, cfg.train_frac, cfg.benign_ratio});
}

void stage_train(const ExperimentConfig& cfg, const StagePaths& paths) {
  RecordsMeta meta = load_records_meta(paths.records_meta());
  DatasetSplit split = load_split(paths);

  auto [train_norm, norm] = preprocess_fit(split.train, meta.categorical_indices());
  fs::create_directories(paths.models_dir());
  save_normalization(paths.norm_params(), norm);

  std::set<std::string> mal_ips = malicious_source_ips(split.train);
  for (const auto& ip : malicious_source_ips(split.test)) mal_ips.insert(ip);
  FlowGraph train_graph = build_flow_graph(train_norm, mal_ips);
  std::vector<Label> labels;
  labels.reserve(split.train.size());
  for (const auto& r : split.train) labels.push_back(r.label);

  if (cfg.egraphsage_enabled) {
    SageModel model = make_sage_model(SageMode::edge_class, norm.feature_dim, cfg.egraphsage);
    TrainReport rep = train(model, train_graph, labels);
    save_sage_model(paths.model_file("egraphsage"), model);
    save_trainlog(paths.trainlog_file("egraphsage"), rep);
  }
  if (cfg.linegraphsage_enabled) {
    LineGraph line = linearize(train_graph);
    SageModel model = make_sage_model(SageMode::node_class, norm.feature_dim, cfg.linegraphsage);
    TrainReport rep = train(model, line, labels);
    save_sage_model(paths.model_file("linegraphsage"), model);
    save_trainlog(paths.trainlog_file("linegraphsage"), rep);
  }
  if (cfg.rf_enabled) {
    Forest forest = rf_fit(feature_matrix(train_norm), labels, cfg.rf);
    save_forest(paths.model_file("rf"), forest);
  }
}

void stage_attack(const ExperimentConfig& cfg, const StagePaths& paths) {
  RecordsMeta meta = load_records_meta(paths.records_meta());
  DatasetSplit split = load_split(paths);
  fs::create_directories(paths.attacks_dir());

  std::set<std::string> mal_ips = malicious_source_ips(split.train);
  for (const auto& ip : malicious_source_ips(split.test)) mal_ips.insert(ip);
  // The attack surface is the raw test set; graph construction follows.
  FlowGraph test_graph = build_flow_graph(split.test, mal_ips);
  std::vector<Endpoint> compromised = compromised_endpoints(test_graph);
  std::set<Endpoint> existing = collect_endpoints(split.train);
  for (const auto& e : collect_endpoints(split.test)) existing.insert(e);

  // U2x is part of the attack taxonomy but never executed; record why
  // instead of leaving it silently absent.
  {
    std::ofstream note(paths.attacks_dir() + "/u2x.txt");
    try {
      u2x_attack();
    } catch (const ExcludedAttackError& e) {
      note << e.what() << '\n';
    }
  }

  auto extras = names_only(meta.extras);
  if (cfg.grids.run_c2x_benign)
    for (int beta : cfg.grids.beta)
      write_attack_csv(
          paths.attacks_dir() + "/c2x_benign_beta" + std::to_string(beta) + ".csv",
          c2x_benign(split.test, compromised, beta, derive_seed(cfg.grids.seed, "c2xb", beta)),
          extras);
  if (cfg.grids.run_c2x_malicious)
    for (int theta : cfg.grids.theta)
      write_attack_csv(
          paths.attacks_dir() + "/c2x_malicious_theta" + std::to_string(theta) + ".csv",
          c2x_malicious(split.test, compromised, theta,
                        derive_seed(cfg.grids.seed, "c2xm", theta)),
          extras);
  if (cfg.grids.run_add_node)
    for (int gamma : cfg.grids.gamma)
      for (int eta : cfg.grids.eta)
        write_attack_csv(
            paths.attacks_dir() + "/add_node_eta" + std::to_string(eta) + "_gamma" +
                std::to_string(gamma) + ".csv",
            add_node_attack(split.test, compromised, existing,
                            {eta, gamma, derive_seed(cfg.grids.seed, "addnode",
                                                     eta * 1000 + gamma)}),
            extras);
}

void stage_evaluate(const ExperimentConfig& cfg, const StagePaths& paths) {
  RecordsMeta meta = load_records_meta(paths.records_meta());
  DatasetSplit split = load_split(paths);
  TrainedModels models = load_models(cfg, paths);

  SweepResult sweep = run_attack_sweep(models, split, cfg.grids);

  ExperimentReport report;
  report.dataset_id = meta.dataset_id;
  report.split_seed = split.seed;
  report.config_text = cfg.raw_text;
  report.baseline = std::move(sweep.baseline);
  report.curves = std::move(sweep.curves);
  report.feature_variants = std::move(sweep.feature_variants);
  save_report_data(paths.report_data(), report);
}

void stage_report(const ExperimentConfig& /*cfg*/, const StagePaths& paths) {
  ExperimentReport report = load_report_data(paths.report_data());
  emit_report(report, paths.dir);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::string& through_stage) {
  StagePaths paths{cfg.out_dir};
  ExperimentReport report;
  std::vector<std::pair<std::string, double>> timings;

  const std::pair<std::string, void (*)(const ExperimentConfig&, const StagePaths&)> stages[] = {
      {"ingest", stage_ingest},   {"split", stage_split},       {"train", stage_train},
      {"attack", stage_attack},   {"evaluate", stage_evaluate}, {"report", stage_report},
  };
  bool known = through_stage.empty();
  for (const auto& [name, fn] : stages) known |= (name == through_stage);
  if (!known) throw std::runtime_error("run: unknown stage '" + through_stage + "'");

  for (const auto& [name, fn] : stages) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      fn(cfg, paths);
    } catch (const std::exception& e) {
      throw std::runtime_error("[" + name + "] " + e.what());
    }
    timings.emplace_back(name,
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                             .count());
    if (name == through_stage) break;
  }

  if (fs::exists(paths.report_data())) {
    report = load_report_data(paths.report_data());
    report.stage_seconds = timings;
    if (through_stage.empty() || through_stage == "report") {
      // Refresh timings.txt with the measured stage times.
      std::ofstream out(paths.dir + "/timings.txt");
      out << "stage seconds\n";
      char buf[64];
      for (const auto& [stage, sec] : timings) {
        std::snprintf(buf, sizeof(buf), "%s %.3f\n", stage.c_str(), sec);
        out << buf;
      }
    }
  }
  return report;
}

}  // namespace gnids
