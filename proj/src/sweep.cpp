#include "gnids/sweep.hpp"

#include <algorithm>
#include <stdexcept>

#include "gnids/graph.hpp"
#include "gnids/rng.hpp"

namespace gnids {

double detection_rate_on_originals(const std::vector<Label>& predictions,
                                   const std::vector<Label>& original_labels) {
  if (predictions.size() < original_labels.size())
    throw std::runtime_error("detection_rate_on_originals: fewer predictions than originals");
  int64_t tp = 0, mal = 0;
  for (size_t i = 0; i < original_labels.size(); ++i) {
    if (original_labels[i] != Label::malicious) continue;
    ++mal;
    if (predictions[i] == Label::malicious) ++tp;
  }
  if (mal == 0) return 0.0;
  return static_cast<double>(tp) / static_cast<double>(mal);
}

namespace {

std::vector<Label> labels_of(const std::vector<NetflowRecord>& records) {
  std::vector<Label> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

struct Evaluator {
  const TrainedModels& models;
  const DatasetSplit& split;
  std::set<std::string> mal_ips;
  std::vector<Label> original_labels;

  Evaluator(const TrainedModels& m, const DatasetSplit& s) : models(m), split(s) {
    mal_ips = malicious_source_ips(s.train);
    for (const auto& ip : malicious_source_ips(s.test)) mal_ips.insert(ip);
    original_labels = labels_of(s.test);
  }

  /// DR of each requested model on (original test + additions).
  double eval_edge(const std::vector<NetflowRecord>& attacked_raw) const {
    auto normed = preprocess_apply(attacked_raw, models.norm);
    FlowGraph g = build_flow_graph(normed, mal_ips);
    return detection_rate_on_originals(predict(models.edge_model, g), original_labels);
  }
  double eval_node(const std::vector<NetflowRecord>& attacked_raw) const {
    auto normed = preprocess_apply(attacked_raw, models.norm);
    FlowGraph g = build_flow_graph(normed, mal_ips);
    return detection_rate_on_originals(predict(models.node_model, linearize(g)), original_labels);
  }
  double eval_rf(const std::vector<NetflowRecord>& attacked_raw) const {
    auto normed = preprocess_apply(attacked_raw, models.norm);
    return detection_rate_on_originals(rf_predict(models.rf, feature_matrix(normed)),
                                       original_labels);
  }
};

}  // namespace

SweepResult run_attack_sweep(const TrainedModels& models, const DatasetSplit& split,
                             const SweepGrids& grids) {
  if (split.test.empty()) throw std::runtime_error("run_attack_sweep: empty test set");
  Evaluator ev(models, split);

  // Baseline graph and per-model clean metrics.
  auto test_norm = preprocess_apply(split.test, models.norm);
  FlowGraph baseline_graph = build_flow_graph(test_norm, ev.mal_ips);
  std::vector<Endpoint> compromised = compromised_endpoints(baseline_graph);

  std::set<Endpoint> existing = collect_endpoints(split.train);
  for (const auto& e : collect_endpoints(split.test)) existing.insert(e);

  SweepResult result;
  double base_edge = 0.0, base_node = 0.0, base_rf = 0.0;
  if (models.has_edge) {
    auto preds = predict(models.edge_model, baseline_graph);
    result.baseline.emplace_back("egraphsage", compute_metrics(preds, ev.original_labels));
    base_edge = detection_rate_on_originals(preds, ev.original_labels);
  }
  if (models.has_node) {
    auto preds = predict(models.node_model, linearize(baseline_graph));
    result.baseline.emplace_back("linegraphsage", compute_metrics(preds, ev.original_labels));
    base_node = detection_rate_on_originals(preds, ev.original_labels);
  }
  if (models.has_rf) {
    auto preds = rf_predict(models.rf, feature_matrix(test_norm));
    result.baseline.emplace_back("rf", compute_metrics(preds, ev.original_labels));
    base_rf = detection_rate_on_originals(preds, ev.original_labels);
  }

  struct GnnTarget {
    const char* name;
    double baseline;
    bool enabled;
  };
  GnnTarget gnns[] = {{"egraphsage", base_edge, models.has_edge},
                      {"linegraphsage", base_node, models.has_node}};

  auto eval_for = [&](const char* model_name, const std::vector<NetflowRecord>& attacked) {
    return std::string(model_name) == "egraphsage" ? ev.eval_edge(attacked)
                                                   : ev.eval_node(attacked);
  };

  if (grids.run_c2x_benign && compromised.size() > 0) {
    for (const auto& gnn : gnns) {
      if (!gnn.enabled) continue;
      DRCurve curve{"c2x_benign", gnn.name, "", gnn.baseline, {{0.0, gnn.baseline}}};
      for (int beta : grids.beta) {
        AttackResult ar =
            c2x_benign(split.test, compromised, beta, derive_seed(grids.seed, "c2xb", beta));
        curve.points.emplace_back(beta, eval_for(gnn.name, all_records(ar)));
      }
      result.curves.push_back(std::move(curve));
    }
  }

  if (grids.run_c2x_malicious && compromised.size() > 0) {
    for (const auto& gnn : gnns) {
      if (!gnn.enabled) continue;
      DRCurve curve{"c2x_malicious", gnn.name, "", gnn.baseline, {{0.0, gnn.baseline}}};
      for (int theta : grids.theta) {
        AttackResult ar =
            c2x_malicious(split.test, compromised, theta, derive_seed(grids.seed, "c2xm", theta));
        curve.points.emplace_back(theta, eval_for(gnn.name, all_records(ar)));
      }
      result.curves.push_back(std::move(curve));
    }
  }

  if (grids.run_add_node && compromised.size() > 0) {
    for (const auto& gnn : gnns) {
      if (!gnn.enabled) continue;
      for (int gamma : grids.gamma) {
        DRCurve curve{"add_node", gnn.name, "gamma=" + std::to_string(gamma), gnn.baseline,
                      {{0.0, gnn.baseline}}};
        for (int eta : grids.eta) {
          AddNodeSpec spec{eta, gamma,
                           derive_seed(grids.seed, "addnode", eta * 1000 + gamma)};
          AttackResult ar = add_node_attack(split.test, compromised, existing, spec);
          curve.points.emplace_back(eta, eval_for(gnn.name, all_records(ar)));
        }
        result.curves.push_back(std::move(curve));
      }
    }
  }

  if (grids.run_feature) {
    // 15 groups x |steps| variants; curves carry the per-step mean over groups.
    std::vector<FeatureAttackSpec> grid = feature_attack_grid(grids.feature_steps);
    struct Acc {
      std::string name;
      double baseline;
      std::vector<double> sum;  // per step index
      bool enabled;
    };
    std::vector<Acc> accs = {
        {"egraphsage", base_edge, std::vector<double>(grids.feature_steps.size(), 0.0),
         models.has_edge},
        {"linegraphsage", base_node, std::vector<double>(grids.feature_steps.size(), 0.0),
         models.has_node},
        {"rf", base_rf, std::vector<double>(grids.feature_steps.size(), 0.0), models.has_rf},
    };
    int groups = 0;
    for (const auto& spec : grid) {
      size_t step_idx =
          std::find(grids.feature_steps.begin(), grids.feature_steps.end(), spec.step_value) -
          grids.feature_steps.begin();
      if (step_idx == 0) ++groups;
      AttackResult ar = feature_attack(split.test, spec);
      auto attacked = all_records(ar);
      FeatureVariantOutcome outcome{spec.group_name(), spec.step_value, {}};
      for (auto& acc : accs) {
        if (!acc.enabled) continue;
        double dr = acc.name == "rf" ? ev.eval_rf(attacked) : eval_for(acc.name.c_str(), attacked);
        acc.sum[step_idx] += dr;
        outcome.dr_by_model.emplace_back(acc.name, dr);
      }
      result.feature_variants.push_back(std::move(outcome));
    }
    for (auto& acc : accs) {
      if (!acc.enabled) continue;
      DRCurve curve{"feature", acc.name, "", acc.baseline, {{0.0, acc.baseline}}};
      for (size_t s = 0; s < grids.feature_steps.size(); ++s)
        curve.points.emplace_back(grids.feature_steps[s], acc.sum[s] / groups);
      result.curves.push_back(std::move(curve));
    }
  }

  return result;
}

}  // namespace gnids
