#include "gnids/forest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "gnids/rng.hpp"

namespace gnids {

namespace {

struct TreeBuilder {
  const Eigen::MatrixXd& X;
  const std::vector<Label>& y;
  const ForestConfig& cfg;
  Rng& rng;
  DecisionTree tree;

  int n_candidate_features() const {
    int d = static_cast<int>(X.cols());
    if (cfg.features_per_split == FeaturesPerSplit::all) return d;
    return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  }

  static double gini(int n_mal, int n) {
    if (n == 0) return 0.0;
    double p = static_cast<double>(n_mal) / n;
    return 2.0 * p * (1.0 - p);
  }

  int make_leaf(const std::vector<int>& idx) {
    int n_mal = 0;
    for (int i : idx)
      if (y[i] == Label::malicious) ++n_mal;
    int n_ben = static_cast<int>(idx.size()) - n_mal;
    TreeNode leaf;
    leaf.leaf_class = n_mal > n_ben ? Label::malicious : Label::benign;  // tie -> benign
    leaf.leaf_fraction =
        idx.empty() ? 0.0 : static_cast<double>(std::max(n_mal, n_ben)) / idx.size();
    tree.nodes.push_back(leaf);
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  // Best Gini split on one feature over the node's samples. Returns
  // (impurity, threshold) or impurity = infinity when the feature is constant.
  std::pair<double, double> best_split_on_feature(const std::vector<int>& idx, int f) const {
    std::vector<std::pair<double, Label>> vals;
    vals.reserve(idx.size());
    for (int i : idx) vals.emplace_back(X(i, f), y[i]);
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    int n = static_cast<int>(vals.size());
    int total_mal = 0;
    for (const auto& [v, l] : vals) total_mal += (l == Label::malicious);

    double best = std::numeric_limits<double>::infinity();
    double best_thr = 0.0;
    int left_mal = 0;
    for (int k = 0; k < n - 1; ++k) {
      left_mal += (vals[k].second == Label::malicious);
      if (vals[k + 1].first <= vals[k].first) continue;  // no boundary between equal values
      int nl = k + 1, nr = n - nl;
      double w = (nl * gini(left_mal, nl) + nr * gini(total_mal - left_mal, nr)) / n;
      if (w < best) {
        best = w;
        best_thr = 0.5 * (vals[k].first + vals[k + 1].first);
      }
    }
    return {best, best_thr};
  }

  int grow(std::vector<int> idx, int depth) {
    int n_mal = 0;
    for (int i : idx)
      if (y[i] == Label::malicious) ++n_mal;
    int n = static_cast<int>(idx.size());
    bool pure = (n_mal == 0 || n_mal == n);
    bool depth_capped = cfg.max_depth > 0 && depth >= cfg.max_depth;
    if (n < 2 || pure || depth_capped) return make_leaf(idx);

    // Candidate features for this split.
    int d = static_cast<int>(X.cols());
    std::vector<int> feats;
    int k = n_candidate_features();
    if (k >= d) {
      feats.resize(d);
      for (int f = 0; f < d; ++f) feats[f] = f;
    } else {
      feats = sample_without_replacement(d, k, rng);
    }

    double node_gini = gini(n_mal, n);
    double best = node_gini;
    int best_f = -1;
    double best_thr = 0.0;
    for (int f : feats) {
      auto [w, thr] = best_split_on_feature(idx, f);
      if (w < best - 1e-12) {
        best = w;
        best_f = f;
        best_thr = thr;
      }
    }
    if (best_f < 0) return make_leaf(idx);  // no improving split (e.g. constant features)

    std::vector<int> left_idx, right_idx;
    for (int i : idx) (X(i, best_f) < best_thr ? left_idx : right_idx).push_back(i);
    if (left_idx.empty() || right_idx.empty()) return make_leaf(idx);

    int self = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[self].feature = best_f;
    tree.nodes[self].threshold = best_thr;
    int l = grow(std::move(left_idx), depth + 1);
    int r = grow(std::move(right_idx), depth + 1);
    tree.nodes[self].left = l;
    tree.nodes[self].right = r;
    return self;
  }
};

Label tree_predict(const DecisionTree& t, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  int node = 0;
  while (t.nodes[node].feature >= 0)
    node = x[t.nodes[node].feature] < t.nodes[node].threshold ? t.nodes[node].left
                                                              : t.nodes[node].right;
  return t.nodes[node].leaf_class;
}

}  // namespace

Forest rf_fit(const Eigen::MatrixXd& features, const std::vector<Label>& labels,
              const ForestConfig& config) {
  const int n = static_cast<int>(features.rows());
  if (n == 0) throw std::runtime_error("rf_fit: empty training set");
  if (static_cast<int>(labels.size()) != n)
    throw std::runtime_error("rf_fit: feature/label count mismatch");
  if (config.n_trees < 1) throw std::runtime_error("rf_fit: n_trees must be >= 1");
  bool has_ben = false, has_mal = false;
  for (Label l : labels) (l == Label::malicious ? has_mal : has_ben) = true;
  if (!has_ben || !has_mal)
    throw std::runtime_error("rf_fit: labels contain a single class; need both");

  Forest forest;
  forest.config = config;
  forest.feature_dim = static_cast<int>(features.cols());
  forest.trees.reserve(config.n_trees);
  for (int t = 0; t < config.n_trees; ++t) {
    Rng rng(derive_seed(config.seed, "rf-tree", t));
    std::vector<int> boot(n);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int i = 0; i < n; ++i) boot[i] = pick(rng);

    TreeBuilder b{features, labels, config, rng, {}};
    b.grow(std::move(boot), 0);
    forest.trees.push_back(std::move(b.tree));
  }
  return forest;
}

std::vector<Label> rf_predict(const Forest& forest, const Eigen::MatrixXd& features) {
  if (forest.trees.empty()) throw std::runtime_error("rf_predict: forest is not trained");
  if (features.cols() != forest.feature_dim)
    throw std::runtime_error("rf_predict: expected " + std::to_string(forest.feature_dim) +
                             " features, got " + std::to_string(features.cols()));
  std::vector<Label> out(features.rows());
  for (int i = 0; i < features.rows(); ++i) {
    int mal_votes = 0;
    for (const auto& t : forest.trees)
      mal_votes += (tree_predict(t, features.row(i)) == Label::malicious);
    out[i] = 2 * mal_votes > static_cast<int>(forest.trees.size()) ? Label::malicious
                                                                   : Label::benign;
  }
  return out;
}

void save_forest(const std::string& path, const Forest& forest) {
  std::ofstream out(path + ".tmp");
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "gnids-model v1\n";
  out << "mode random_forest\n";
  out << "feature_dim " << forest.feature_dim << '\n';
  out << "n_trees " << forest.config.n_trees << '\n';
  out << "max_depth " << forest.config.max_depth << '\n';
  out << "features_per_split "
      << (forest.config.features_per_split == FeaturesPerSplit::all ? "all" : "sqrt") << '\n';
  out << "seed " << forest.config.seed << '\n';
  for (const auto& t : forest.trees) {
    out << "tree " << t.nodes.size() << '\n';
    for (const auto& nd : t.nodes) {
      if (nd.feature >= 0)
        out << "s " << nd.feature << ' ' << format_double(nd.threshold) << ' ' << nd.left << ' '
            << nd.right << '\n';
      else
        out << "l " << (nd.leaf_class == Label::malicious ? 1 : 0) << ' '
            << format_double(nd.leaf_fraction) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
  out.close();
  std::filesystem::rename(path + ".tmp", path);
}

Forest load_forest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, version, key, value;
  in >> tag >> version;
  if (tag != "gnids-model" || version != "v1")
    throw std::runtime_error(path + ": not a gnids-model v1 file");
  in >> key >> value;
  if (key != "mode" || value != "random_forest")
    throw std::runtime_error(path + ": not a random_forest model");
  Forest f;
  in >> key >> f.feature_dim;
  in >> key >> f.config.n_trees;
  in >> key >> f.config.max_depth;
  in >> key >> value;
  f.config.features_per_split =
      value == "all" ? FeaturesPerSplit::all : FeaturesPerSplit::sqrt_dim;
  in >> key >> f.config.seed;
  if (!in) throw std::runtime_error(path + ": malformed header");
  while (in >> key) {
    if (key != "tree") throw std::runtime_error(path + ": expected tree section");
    size_t count = 0;
    in >> count;
    DecisionTree t;
    t.nodes.resize(count);
    for (size_t i = 0; i < count; ++i) {
      std::string k;
      in >> k;
      if (k == "s") {
        in >> t.nodes[i].feature >> t.nodes[i].threshold >> t.nodes[i].left >> t.nodes[i].right;
      } else if (k == "l") {
        int mal = 0;
        in >> mal >> t.nodes[i].leaf_fraction;
        t.nodes[i].feature = -1;
        t.nodes[i].leaf_class = mal ? Label::malicious : Label::benign;
      } else {
        throw std::runtime_error(path + ": bad tree node tag '" + k + "'");
      }
    }
    if (!in) throw std::runtime_error(path + ": truncated tree");
    f.trees.push_back(std::move(t));
  }
  if (static_cast<int>(f.trees.size()) != f.config.n_trees)
    throw std::runtime_error(path + ": tree count mismatch");
  return f;
}

}  // namespace gnids
