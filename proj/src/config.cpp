#include "gnids/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gnids/rng.hpp"

namespace gnids {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& ctx) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error(ctx + ": expected boolean, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v, const std::string& ctx) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (...) {
      throw std::runtime_error(ctx + ": bad integer '" + item + "'");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& v, const std::string& ctx) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw std::runtime_error(ctx + ": bad number '" + item + "'");
    }
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  cfg.raw_text = text;

  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    std::string ctx = origin + ":" + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') throw std::runtime_error(ctx + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) throw std::runtime_error(ctx + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    // strip trailing comment
    auto hash = val.find(" #");
    if (hash != std::string::npos) val = trim(val.substr(0, hash));

    auto unknown = [&]() {
      throw std::runtime_error(ctx + ": unknown key '" + key + "' in section [" + section + "]");
    };
    if (section == "dataset") {
      if (key == "kind") cfg.dataset_kind = val;
      else if (key == "path") cfg.csv_path = val;
      else if (key == "schema") cfg.schema_name = val;
      else if (key == "attack_name") cfg.attack_name = val;
      else if (key == "categorical_extras") cfg.categorical_extras = parse_int_list(val, ctx);
      else unknown();
    } else if (section == "synth") {
      if (key == "n_hosts") cfg.synth.n_hosts = std::stoi(val);
      else if (key == "n_compromised") cfg.synth.n_compromised = std::stoi(val);
      else if (key == "benign_flows") cfg.synth.benign_flows = std::stoi(val);
      else if (key == "malicious_flows") cfg.synth.malicious_flows = std::stoi(val);
      else if (key == "pattern") cfg.synth.attack_pattern = attack_pattern_from_string(val);
      else if (key == "seed") cfg.synth.seed = std::stoull(val);
      else unknown();
    } else if (section == "split") {
      if (key == "train_frac") cfg.train_frac = std::stod(val);
      else if (key == "benign_ratio") cfg.benign_ratio = std::stoi(val);
      else if (key == "seed") cfg.split_seed = std::stoull(val);
      else unknown();
    } else if (section == "egraphsage" || section == "linegraphsage") {
      SageConfig& sc = section == "egraphsage" ? cfg.egraphsage : cfg.linegraphsage;
      bool& enabled = section == "egraphsage" ? cfg.egraphsage_enabled : cfg.linegraphsage_enabled;
      if (key == "enabled") enabled = parse_bool(val, ctx);
      else if (key == "hidden_dim") sc.hidden_dim = std::stoi(val);
      else if (key == "learning_rate") sc.learning_rate = std::stod(val);
      else if (key == "epochs") sc.epochs = std::stoi(val);
      else if (key == "seed") sc.seed = std::stoull(val);
      else if (key == "class_weight") sc.class_weight = parse_bool(val, ctx);
      else if (key == "neighbor_cap") sc.neighbor_cap = std::stoi(val);
      else unknown();
    } else if (section == "rf") {
      if (key == "enabled") cfg.rf_enabled = parse_bool(val, ctx);
      else if (key == "n_trees") cfg.rf.n_trees = std::stoi(val);
      else if (key == "max_depth") cfg.rf.max_depth = std::stoi(val);
      else if (key == "features_per_split")
        cfg.rf.features_per_split =
            val == "all" ? FeaturesPerSplit::all : FeaturesPerSplit::sqrt_dim;
      else if (key == "seed") cfg.rf.seed = std::stoull(val);
      else unknown();
    } else if (section == "attacks") {
      if (key == "feature") cfg.grids.run_feature = parse_bool(val, ctx);
      else if (key == "c2x_benign") cfg.grids.run_c2x_benign = parse_bool(val, ctx);
      else if (key == "c2x_malicious") cfg.grids.run_c2x_malicious = parse_bool(val, ctx);
      else if (key == "add_node") cfg.grids.run_add_node = parse_bool(val, ctx);
      else if (key == "beta") cfg.grids.beta = parse_int_list(val, ctx);
      else if (key == "theta") cfg.grids.theta = parse_int_list(val, ctx);
      else if (key == "eta") cfg.grids.eta = parse_int_list(val, ctx);
      else if (key == "gamma") cfg.grids.gamma = parse_int_list(val, ctx);
      else if (key == "feature_steps") cfg.grids.feature_steps = parse_double_list(val, ctx);
      else if (key == "seed") cfg.grids.seed = std::stoull(val);
      else unknown();
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = val;
      else unknown();
    } else {
      throw std::runtime_error(ctx + ": unknown section [" + section + "]");
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void validate_config(const ExperimentConfig& cfg, bool allow_grid_override) {
  if (cfg.dataset_kind != "synth" && cfg.dataset_kind != "csv")
    throw std::runtime_error("config: dataset kind must be synth or csv");
  if (cfg.dataset_kind == "csv") {
    if (cfg.csv_path.empty()) throw std::runtime_error("config: csv dataset needs a path");
    if (!std::filesystem::exists(cfg.csv_path))
      throw std::runtime_error("config: dataset file does not exist: " + cfg.csv_path);
    if (cfg.schema_name.rfind("file:", 0) == 0) {
      std::string p = cfg.schema_name.substr(5);
      if (!std::filesystem::exists(p))
        throw std::runtime_error("config: schema file does not exist: " + p);
    }
  } else {
    if (cfg.synth.n_hosts < 2 || cfg.synth.n_compromised < 1 ||
        cfg.synth.n_compromised >= cfg.synth.n_hosts)
      throw std::runtime_error("config: synth host counts invalid");
    if (cfg.synth.benign_flows < 1 || cfg.synth.malicious_flows < 1)
      throw std::runtime_error("config: synth flow counts must be positive");
  }
  if (!(cfg.train_frac > 0.0 && cfg.train_frac < 1.0))
    throw std::runtime_error("config: train_frac must be in (0,1)");
  if (cfg.benign_ratio < 1) throw std::runtime_error("config: benign_ratio must be >= 1");
  if (!cfg.egraphsage_enabled && !cfg.linegraphsage_enabled && !cfg.rf_enabled)
    throw std::runtime_error("config: no model enabled");

  if (!allow_grid_override) {
    auto subset_of = [](const std::vector<int>& values, std::set<int> allowed,
                        const char* name) {
      for (int v : values)
        if (!allowed.count(v))
          throw std::runtime_error(std::string("config: ") + name + " value " +
                                   std::to_string(v) +
                                   " is outside the published grid (use --override-grids)");
    };
    subset_of(cfg.grids.beta, {1, 2, 5, 10, 20}, "beta");
    subset_of(cfg.grids.theta, {1, 2, 5, 10, 20}, "theta");
    subset_of(cfg.grids.eta, {1, 5, 10, 100, 1000}, "eta");
    subset_of(cfg.grids.gamma, {1, 5, 20}, "gamma");
    std::set<double> steps = {1, 2, 4, 8, 16, 64, 256, 512, 1024};
    for (double s : cfg.grids.feature_steps)
      if (!steps.count(s))
        throw std::runtime_error("config: feature step " + std::to_string(s) +
                                 " is outside the default schedule (use --override-grids)");
  }
  for (int v : cfg.grids.beta)
    if (v < 1) throw std::runtime_error("config: beta values must be positive");
  for (int v : cfg.grids.theta)
    if (v < 1) throw std::runtime_error("config: theta values must be positive");
  for (int v : cfg.grids.eta)
    if (v < 1) throw std::runtime_error("config: eta values must be positive");
  for (int v : cfg.grids.gamma)
    if (v < 1) throw std::runtime_error("config: gamma values must be positive");
}

void apply_master_seed(ExperimentConfig& cfg, uint64_t master) {
  cfg.synth.seed = derive_seed(master, "synth");
  cfg.split_seed = derive_seed(master, "split");
  cfg.egraphsage.seed = derive_seed(master, "egraphsage");
  cfg.linegraphsage.seed = derive_seed(master, "linegraphsage");
  cfg.rf.seed = derive_seed(master, "rf");
  cfg.grids.seed = derive_seed(master, "attacks");
}

}  // namespace gnids
