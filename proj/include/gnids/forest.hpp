#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gnids/netflow.hpp"

namespace gnids {

enum class FeaturesPerSplit { sqrt_dim, all };

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 0;  // 0 = unlimited
  FeaturesPerSplit features_per_split = FeaturesPerSplit::sqrt_dim;
  uint64_t seed = 0;
};

/// CART node; feature < 0 marks a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Label leaf_class = Label::benign;
  double leaf_fraction = 0.0;  // majority share among training samples in the leaf
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct Forest {
  ForestConfig config;
  int feature_dim = 0;
  std::vector<DecisionTree> trees;
};

/// Gini-impurity CART trees on size-n bootstrap samples; per-tree seeds are
/// derived from config.seed, so fitting is deterministic and trees are
/// independent.
Forest rf_fit(const Eigen::MatrixXd& features, const std::vector<Label>& labels,
              const ForestConfig& config);

/// Majority vote across trees; exact ties resolve to benign.
std::vector<Label> rf_predict(const Forest& forest, const Eigen::MatrixXd& features);

void save_forest(const std::string& path, const Forest& forest);
Forest load_forest(const std::string& path);

}  // namespace gnids
