#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gnids/graph.hpp"
#include "gnids/metrics.hpp"

namespace gnids {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class SageMode { edge_class, node_class };

struct SageConfig {
  int hidden_dim = 128;
  double learning_rate = 0.01;  // peak rate; training applies cosine decay
  int epochs = 200;
  uint64_t seed = 0;
  bool class_weight = true;  // inverse-class-frequency weighting in the loss
  int neighbor_cap = 0;      // 0 = full neighborhood; >0 = seeded subsample per node
};

struct SageLayerParams {
  Matrix w_self;   // d_in x d_out
  Matrix w_neigh;  // d_agg x d_out
  Vector bias;     // d_out
};

/// Two-layer inductive GraphSAGE variant. In edge_class mode the model
/// consumes a flow graph (node inputs are all-ones vectors of the edge
/// feature dimension, aggregation runs over incident edges in both
/// directions) and classifies edges from the concatenated endpoint
/// embeddings. In node_class mode it consumes a line graph and classifies
/// nodes from their own embedding. Aggregation is a full-neighborhood mean;
/// ReLU follows each layer; the head is a bias-free linear map to 2 logits.
struct SageModel {
  SageMode mode = SageMode::edge_class;
  int input_dim = 0;
  std::vector<SageLayerParams> layers;  // length 2
  Matrix head;                          // (2*hidden | hidden) x 2
  SageConfig config;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  Metrics final_train_metrics;
  double wall_seconds = 0.0;
};

/// Seeded Glorot-uniform weights, zero biases.
SageModel make_sage_model(SageMode mode, int input_dim, const SageConfig& config);

Matrix egraphsage_forward(const SageModel& model, const FlowGraph& g);     // |E| x 2 logits
Matrix linegraphsage_forward(const SageModel& model, const LineGraph& lg); // |V| x 2 logits

/// Full-batch Adam on class-weighted softmax cross-entropy. Deterministic
/// per config.seed; throws if labels are single-class or the loss turns
/// non-finite (naming the epoch).
TrainReport train(SageModel& model, const FlowGraph& g, const std::vector<Label>& labels);
TrainReport train(SageModel& model, const LineGraph& lg, const std::vector<Label>& labels);

/// Argmax over the two logits; exact ties resolve to benign.
std::vector<Label> predict(const SageModel& model, const FlowGraph& g);
std::vector<Label> predict(const SageModel& model, const LineGraph& lg);
std::vector<Label> logits_to_labels(const Matrix& logits);

/// Central-finite-difference check of the analytic parameter gradients.
/// Returns the max relative error (absolute floor 1e-4 in the denominator).
double gradient_check(const SageModel& model, const FlowGraph& g, const std::vector<Label>& labels,
                      double epsilon);
double gradient_check(const SageModel& model, const LineGraph& lg, const std::vector<Label>& labels,
                      double epsilon);

Matrix softmax_rows(const Matrix& logits);

void save_sage_model(const std::string& path, const SageModel& model);
SageModel load_sage_model(const std::string& path);

}  // namespace gnids
