#include "gnids/sage.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gnids/netflow.hpp"
#include "gnids/rng.hpp"

namespace gnids {

namespace {

// Per node: (incident edge id, opposite endpoint). Both directions count;
// a self-loop contributes twice.
using Incidence = std::vector<std::vector<std::pair<int, int>>>;

Incidence build_incidence(const FlowGraph& g, const SageConfig& cfg) {
  Incidence inc(g.num_nodes());
  for (int e = 0; e < g.num_edges(); ++e) {
    inc[g.edges[e].src].emplace_back(e, g.edges[e].dst);
    inc[g.edges[e].dst].emplace_back(e, g.edges[e].src);
  }
  if (cfg.neighbor_cap > 0) {
    for (int v = 0; v < g.num_nodes(); ++v) {
      auto& lst = inc[v];
      if (static_cast<int>(lst.size()) <= cfg.neighbor_cap) continue;
      Rng rng(derive_seed(cfg.seed, "neighbor-cap", v));
      for (int i = 0; i < cfg.neighbor_cap; ++i) {
        std::uniform_int_distribution<int> d(i, static_cast<int>(lst.size()) - 1);
        std::swap(lst[i], lst[d(rng)]);
      }
      lst.resize(cfg.neighbor_cap);
    }
  }
  return inc;
}

std::vector<std::vector<int>> capped_adjacency(const LineGraph& lg, const SageConfig& cfg) {
  std::vector<std::vector<int>> nbrs = lg.adjacency;
  if (cfg.neighbor_cap > 0) {
    for (size_t v = 0; v < nbrs.size(); ++v) {
      auto& lst = nbrs[v];
      if (static_cast<int>(lst.size()) <= cfg.neighbor_cap) continue;
      Rng rng(derive_seed(cfg.seed, "neighbor-cap", v));
      for (int i = 0; i < cfg.neighbor_cap; ++i) {
        std::uniform_int_distribution<int> d(i, static_cast<int>(lst.size()) - 1);
        std::swap(lst[i], lst[d(rng)]);
      }
      lst.resize(cfg.neighbor_cap);
    }
  }
  return nbrs;
}

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_mask(const Matrix& pre, const Matrix& grad) {
  return (pre.array() > 0.0).cast<double>().matrix().cwiseProduct(grad);
}

struct SageGrads {
  std::vector<SageLayerParams> layers;
  Matrix head;
};

SageGrads zero_grads_like(const SageModel& m) {
  SageGrads g;
  g.layers.resize(m.layers.size());
  for (size_t i = 0; i < m.layers.size(); ++i) {
    g.layers[i].w_self = Matrix::Zero(m.layers[i].w_self.rows(), m.layers[i].w_self.cols());
    g.layers[i].w_neigh = Matrix::Zero(m.layers[i].w_neigh.rows(), m.layers[i].w_neigh.cols());
    g.layers[i].bias = Vector::Zero(m.layers[i].bias.size());
  }
  g.head = Matrix::Zero(m.head.rows(), m.head.cols());
  return g;
}

/// Shared forward/backward machinery for both model modes; holds the graph
/// structure and the per-pass activation caches.
class SageEngine {
 public:
  SageEngine(const SageModel& m, const FlowGraph& g)
      : mode_(SageMode::edge_class), graph_(&g), features_(&g.edge_features) {
    if (m.mode != SageMode::edge_class)
      throw std::runtime_error("egraphsage: model is not in edge_class mode");
    if (m.input_dim != g.edge_features.cols())
      throw std::runtime_error("egraphsage: model expects edge feature dim " +
                               std::to_string(m.input_dim) + ", graph has " +
                               std::to_string(g.edge_features.cols()));
    inc_ = build_incidence(g, m.config);
    n_nodes_ = g.num_nodes();
    n_targets_ = g.num_edges();
  }

  SageEngine(const SageModel& m, const LineGraph& lg)
      : mode_(SageMode::node_class), line_(&lg), features_(&lg.node_features) {
    if (m.mode != SageMode::node_class)
      throw std::runtime_error("linegraphsage: model is not in node_class mode");
    if (m.input_dim != lg.node_features.cols())
      throw std::runtime_error("linegraphsage: model expects node feature dim " +
                               std::to_string(m.input_dim) + ", line graph has " +
                               std::to_string(lg.node_features.cols()));
    nbrs_ = capped_adjacency(lg, m.config);
    n_nodes_ = lg.num_nodes();
    n_targets_ = lg.num_nodes();
  }

  int num_targets() const { return n_targets_; }

  Matrix forward(const SageModel& m) {
    const int dh = static_cast<int>(m.layers[0].bias.size());
    if (mode_ == SageMode::edge_class) {
      const Matrix& E = *features_;
      X0_ = Matrix::Ones(n_nodes_, m.input_dim);
      A1_.setZero(n_nodes_, m.input_dim);
      for (int v = 0; v < n_nodes_; ++v) {
        if (inc_[v].empty()) continue;
        for (const auto& [e, other] : inc_[v]) A1_.row(v) += E.row(e);
        A1_.row(v) /= static_cast<double>(inc_[v].size());
      }
      P1_ = X0_ * m.layers[0].w_self + A1_ * m.layers[0].w_neigh;
      P1_.rowwise() += m.layers[0].bias.transpose();
      H1_ = relu(P1_);
      A2_.setZero(n_nodes_, dh);
      for (int v = 0; v < n_nodes_; ++v) {
        if (inc_[v].empty()) continue;
        for (const auto& [e, other] : inc_[v]) A2_.row(v) += H1_.row(other);
        A2_.row(v) /= static_cast<double>(inc_[v].size());
      }
      P2_ = H1_ * m.layers[1].w_self + A2_ * m.layers[1].w_neigh;
      P2_.rowwise() += m.layers[1].bias.transpose();
      H2_ = relu(P2_);
      concat_.resize(n_targets_, 2 * dh);
      for (int e = 0; e < n_targets_; ++e) {
        concat_.row(e).head(dh) = H2_.row(graph_->edges[e].src);
        concat_.row(e).tail(dh) = H2_.row(graph_->edges[e].dst);
      }
      return concat_ * m.head;
    }
    // node_class
    X0_ = *features_;
    A1_.setZero(n_nodes_, m.input_dim);
    for (int v = 0; v < n_nodes_; ++v) {
      if (nbrs_[v].empty()) continue;
      for (int u : nbrs_[v]) A1_.row(v) += X0_.row(u);
      A1_.row(v) /= static_cast<double>(nbrs_[v].size());
    }
    P1_ = X0_ * m.layers[0].w_self + A1_ * m.layers[0].w_neigh;
    P1_.rowwise() += m.layers[0].bias.transpose();
    H1_ = relu(P1_);
    A2_.setZero(n_nodes_, dh);
    for (int v = 0; v < n_nodes_; ++v) {
      if (nbrs_[v].empty()) continue;
      for (int u : nbrs_[v]) A2_.row(v) += H1_.row(u);
      A2_.row(v) /= static_cast<double>(nbrs_[v].size());
    }
    P2_ = H1_ * m.layers[1].w_self + A2_ * m.layers[1].w_neigh;
    P2_.rowwise() += m.layers[1].bias.transpose();
    H2_ = relu(P2_);
    return H2_ * m.head;
  }

  /// Hash of the ReLU activation pattern of the most recent forward().
  /// Finite differences are only a valid derivative oracle when both
  /// evaluations stay on the same side of every kink.
  uint64_t activation_pattern() const {
    uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const Matrix& p) {
      const double* d = p.data();
      for (long i = 0; i < p.size(); ++i) {
        h ^= (d[i] > 0.0) ? 0x9eull : 0x31ull;
        h *= 0x100000001b3ull;
      }
    };
    mix(P1_);
    mix(P2_);
    return h;
  }

  /// Backward pass for the most recent forward(); dlogits is dL/dlogits.
  SageGrads backward(const SageModel& m, const Matrix& dlogits) {
    const int dh = static_cast<int>(m.layers[0].bias.size());
    SageGrads g = zero_grads_like(m);
    Matrix dH2;
    if (mode_ == SageMode::edge_class) {
      g.head = concat_.transpose() * dlogits;
      Matrix dC = dlogits * m.head.transpose();
      dH2 = Matrix::Zero(n_nodes_, dh);
      for (int e = 0; e < n_targets_; ++e) {
        dH2.row(graph_->edges[e].src) += dC.row(e).head(dh);
        dH2.row(graph_->edges[e].dst) += dC.row(e).tail(dh);
      }
    } else {
      g.head = H2_.transpose() * dlogits;
      dH2 = dlogits * m.head.transpose();
    }
    Matrix dP2 = relu_mask(P2_, dH2);
    g.layers[1].w_self = H1_.transpose() * dP2;
    g.layers[1].w_neigh = A2_.transpose() * dP2;
    g.layers[1].bias = dP2.colwise().sum().transpose();

    Matrix dA2 = dP2 * m.layers[1].w_neigh.transpose();
    Matrix dH1 = dP2 * m.layers[1].w_self.transpose();
    if (mode_ == SageMode::edge_class) {
      for (int v = 0; v < n_nodes_; ++v) {
        if (inc_[v].empty()) continue;
        double inv = 1.0 / static_cast<double>(inc_[v].size());
        for (const auto& [e, other] : inc_[v]) dH1.row(other) += inv * dA2.row(v);
      }
    } else {
      for (int v = 0; v < n_nodes_; ++v) {
        if (nbrs_[v].empty()) continue;
        double inv = 1.0 / static_cast<double>(nbrs_[v].size());
        for (int u : nbrs_[v]) dH1.row(u) += inv * dA2.row(v);
      }
    }
    Matrix dP1 = relu_mask(P1_, dH1);
    g.layers[0].w_self = X0_.transpose() * dP1;
    g.layers[0].w_neigh = A1_.transpose() * dP1;
    g.layers[0].bias = dP1.colwise().sum().transpose();
    return g;
  }

 private:
  SageMode mode_;
  const FlowGraph* graph_ = nullptr;
  const LineGraph* line_ = nullptr;
  const Matrix* features_ = nullptr;
  Incidence inc_;
  std::vector<std::vector<int>> nbrs_;
  int n_nodes_ = 0;
  int n_targets_ = 0;

  Matrix X0_, A1_, P1_, H1_, A2_, P2_, H2_, concat_;
};

struct LossGrad {
  double loss = 0.0;
  Matrix dlogits;
};

std::pair<double, double> class_weights(const std::vector<Label>& labels, bool weighted) {
  if (!weighted) return {1.0, 1.0};
  double n = static_cast<double>(labels.size());
  double n_mal = 0;
  for (Label l : labels) n_mal += (l == Label::malicious) ? 1.0 : 0.0;
  double n_ben = n - n_mal;
  return {n / (2.0 * n_ben), n / (2.0 * n_mal)};
}

LossGrad weighted_cross_entropy(const Matrix& logits, const std::vector<Label>& labels,
                                bool weighted, bool want_grad) {
  const int n = static_cast<int>(logits.rows());
  auto [w_ben, w_mal] = class_weights(labels, weighted);
  double sum_w = 0.0;
  for (Label l : labels) sum_w += (l == Label::malicious) ? w_mal : w_ben;

  Matrix p = softmax_rows(logits);
  LossGrad out;
  if (want_grad) out.dlogits = Matrix::Zero(n, 2);
  for (int i = 0; i < n; ++i) {
    int y = labels[i] == Label::malicious ? 1 : 0;
    double w = (y == 1 ? w_mal : w_ben) / sum_w;
    out.loss -= w * std::log(std::max(p(i, y), 1e-300));
    if (want_grad) {
      out.dlogits(i, 0) = w * (p(i, 0) - (y == 0 ? 1.0 : 0.0));
      out.dlogits(i, 1) = w * (p(i, 1) - (y == 1 ? 1.0 : 0.0));
    }
  }
  return out;
}

struct AdamState {
  SageGrads m, v;
  int t = 0;
};

void adam_update_tensor(Eigen::Ref<Matrix> p, Eigen::Ref<Matrix> m, Eigen::Ref<Matrix> v,
                        const Matrix& g, double lr, int t) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  m = b1 * m + (1.0 - b1) * g;
  v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
  double c1 = 1.0 - std::pow(b1, t);
  double c2 = 1.0 - std::pow(b2, t);
  p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

void check_labels(const std::vector<Label>& labels, int n_targets, const char* what) {
  if (static_cast<int>(labels.size()) != n_targets)
    throw std::runtime_error(std::string("train: ") + std::to_string(labels.size()) +
                             " labels for " + std::to_string(n_targets) + " " + what);
  bool has_ben = false, has_mal = false;
  for (Label l : labels) (l == Label::malicious ? has_mal : has_ben) = true;
  if (!has_ben || !has_mal)
    throw std::runtime_error("train: labels contain a single class; need both");
}

TrainReport train_impl(SageModel& model, SageEngine& engine, const std::vector<Label>& labels,
                       const char* what) {
  check_labels(labels, engine.num_targets(), what);
  auto t0 = std::chrono::steady_clock::now();

  AdamState st;
  st.m = zero_grads_like(model);
  st.v = zero_grads_like(model);

  TrainReport report;
  report.epoch_loss.reserve(model.config.epochs);
  for (int epoch = 0; epoch < model.config.epochs; ++epoch) {
    Matrix logits = engine.forward(model);
    LossGrad lg = weighted_cross_entropy(logits, labels, model.config.class_weight, true);
    if (!std::isfinite(lg.loss))
      throw std::runtime_error("train: loss became non-finite at epoch " + std::to_string(epoch));
    report.epoch_loss.push_back(lg.loss);
    SageGrads grads = engine.backward(model, lg.dlogits);

    ++st.t;
    // Cosine decay from the configured rate; full-batch Adam otherwise
    // destabilizes once the loss plateaus near zero.
    double lr = model.config.learning_rate * 0.5 *
                (1.0 + std::cos(M_PI * static_cast<double>(epoch) / model.config.epochs));
    for (size_t i = 0; i < model.layers.size(); ++i) {
      adam_update_tensor(model.layers[i].w_self, st.m.layers[i].w_self, st.v.layers[i].w_self,
                         grads.layers[i].w_self, lr, st.t);
      adam_update_tensor(model.layers[i].w_neigh, st.m.layers[i].w_neigh, st.v.layers[i].w_neigh,
                         grads.layers[i].w_neigh, lr, st.t);
      adam_update_tensor(model.layers[i].bias, st.m.layers[i].bias, st.v.layers[i].bias,
                         grads.layers[i].bias, lr, st.t);
    }
    adam_update_tensor(model.head, st.m.head, st.v.head, grads.head, lr, st.t);
  }

  Matrix logits = engine.forward(model);
  report.final_train_metrics = compute_metrics(logits_to_labels(logits), labels);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

double gradient_check_impl(const SageModel& model, SageEngine& engine,
                           const std::vector<Label>& labels, double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("gradient_check: epsilon must be positive");
  check_labels(labels, engine.num_targets(), "targets");

  SageModel work = model;
  Matrix logits = engine.forward(work);
  LossGrad lg = weighted_cross_entropy(logits, labels, work.config.class_weight, true);
  SageGrads analytic = engine.backward(work, lg.dlogits);

  auto loss_at = [&](uint64_t& pattern) {
    Matrix z = engine.forward(work);
    pattern = engine.activation_pattern();
    return weighted_cross_entropy(z, labels, work.config.class_weight, false).loss;
  };

  double max_rel = 0.0;
  auto check_tensor = [&](double* params, const double* grad, int count) {
    for (int i = 0; i < count; ++i) {
      double saved = params[i];
      uint64_t pat_p = 0, pat_m = 0;
      params[i] = saved + epsilon;
      double lp = loss_at(pat_p);
      params[i] = saved - epsilon;
      double lm = loss_at(pat_m);
      params[i] = saved;
      if (pat_p != pat_m) continue;  // perturbation crossed a ReLU kink
      double numeric = (lp - lm) / (2.0 * epsilon);
      double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-4});
      max_rel = std::max(max_rel, std::abs(grad[i] - numeric) / denom);
    }
  };
  for (size_t i = 0; i < work.layers.size(); ++i) {
    check_tensor(work.layers[i].w_self.data(), analytic.layers[i].w_self.data(),
                 static_cast<int>(work.layers[i].w_self.size()));
    check_tensor(work.layers[i].w_neigh.data(), analytic.layers[i].w_neigh.data(),
                 static_cast<int>(work.layers[i].w_neigh.size()));
    check_tensor(work.layers[i].bias.data(), analytic.layers[i].bias.data(),
                 static_cast<int>(work.layers[i].bias.size()));
  }
  check_tensor(work.head.data(), analytic.head.data(), static_cast<int>(work.head.size()));
  return max_rel;
}

}  // namespace

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (int i = 0; i < logits.rows(); ++i) {
    double mx = logits.row(i).maxCoeff();
    Eigen::RowVectorXd ex = (logits.row(i).array() - mx).exp();
    p.row(i) = ex / ex.sum();
  }
  return p;
}

SageModel make_sage_model(SageMode mode, int input_dim, const SageConfig& config) {
  if (input_dim < 1) throw std::runtime_error("make_sage_model: input_dim must be positive");
  if (config.hidden_dim < 1) throw std::runtime_error("make_sage_model: hidden_dim must be positive");
  SageModel m;
  m.mode = mode;
  m.input_dim = input_dim;
  m.config = config;

  Rng rng(derive_seed(config.seed, "sage-init"));
  auto glorot = [&](int rows, int cols) {
    double lim = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> d(-lim, lim);
    Matrix w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) w(r, c) = d(rng);
    return w;
  };

  const int dh = config.hidden_dim;
  SageLayerParams l1;
  l1.w_self = glorot(input_dim, dh);
  l1.w_neigh = glorot(input_dim, dh);
  l1.bias = Vector::Zero(dh);
  SageLayerParams l2;
  l2.w_self = glorot(dh, dh);
  l2.w_neigh = glorot(dh, dh);
  l2.bias = Vector::Zero(dh);
  m.layers = {std::move(l1), std::move(l2)};
  m.head = glorot(mode == SageMode::edge_class ? 2 * dh : dh, 2);
  return m;
}

Matrix egraphsage_forward(const SageModel& model, const FlowGraph& g) {
  SageEngine engine(model, g);
  return engine.forward(model);
}

Matrix linegraphsage_forward(const SageModel& model, const LineGraph& lg) {
  SageEngine engine(model, lg);
  return engine.forward(model);
}

TrainReport train(SageModel& model, const FlowGraph& g, const std::vector<Label>& labels) {
  SageEngine engine(model, g);
  return train_impl(model, engine, labels, "edges");
}

TrainReport train(SageModel& model, const LineGraph& lg, const std::vector<Label>& labels) {
  SageEngine engine(model, lg);
  return train_impl(model, engine, labels, "line nodes");
}

std::vector<Label> logits_to_labels(const Matrix& logits) {
  std::vector<Label> out(logits.rows());
  for (int i = 0; i < logits.rows(); ++i)
    out[i] = logits(i, 1) > logits(i, 0) ? Label::malicious : Label::benign;
  return out;
}

std::vector<Label> predict(const SageModel& model, const FlowGraph& g) {
  return logits_to_labels(egraphsage_forward(model, g));
}

std::vector<Label> predict(const SageModel& model, const LineGraph& lg) {
  return logits_to_labels(linegraphsage_forward(model, lg));
}

double gradient_check(const SageModel& model, const FlowGraph& g, const std::vector<Label>& labels,
                      double epsilon) {
  SageEngine engine(model, g);
  return gradient_check_impl(model, engine, labels, epsilon);
}

double gradient_check(const SageModel& model, const LineGraph& lg,
                      const std::vector<Label>& labels, double epsilon) {
  SageEngine engine(model, lg);
  return gradient_check_impl(model, engine, labels, epsilon);
}

namespace {

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_double(m(r, c));
    out << '\n';
  }
}

Matrix read_matrix(std::istream& in, const std::string& path, const char* expect) {
  std::string name;
  long rows = 0, cols = 0;
  in >> name >> rows >> cols;
  if (!in || name != expect)
    throw std::runtime_error(path + ": expected section '" + expect + "', got '" + name + "'");
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) in >> m(r, c);
  if (!in) throw std::runtime_error(path + ": truncated matrix " + expect);
  return m;
}

}  // namespace

void save_sage_model(const std::string& path, const SageModel& model) {
  std::ofstream out(path + ".tmp");
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "gnids-model v1\n";
  out << "mode " << (model.mode == SageMode::edge_class ? "edge_class" : "node_class") << '\n';
  out << "input_dim " << model.input_dim << '\n';
  out << "hidden_dim " << model.config.hidden_dim << '\n';
  out << "learning_rate " << format_double(model.config.learning_rate) << '\n';
  out << "epochs " << model.config.epochs << '\n';
  out << "seed " << model.config.seed << '\n';
  out << "class_weight " << (model.config.class_weight ? 1 : 0) << '\n';
  out << "neighbor_cap " << model.config.neighbor_cap << '\n';
  for (size_t i = 0; i < model.layers.size(); ++i) {
    write_matrix(out, "w_self", model.layers[i].w_self);
    write_matrix(out, "w_neigh", model.layers[i].w_neigh);
    write_matrix(out, "bias", model.layers[i].bias);
  }
  write_matrix(out, "head", model.head);
  if (!out) throw std::runtime_error("write failed for " + path);
  out.close();
  std::filesystem::rename(path + ".tmp", path);
}

SageModel load_sage_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, version;
  in >> tag >> version;
  if (tag != "gnids-model" || version != "v1")
    throw std::runtime_error(path + ": not a gnids-model v1 file");
  SageModel m;
  std::string key, value;
  in >> key >> value;
  if (key != "mode") throw std::runtime_error(path + ": missing mode");
  if (value == "edge_class") m.mode = SageMode::edge_class;
  else if (value == "node_class") m.mode = SageMode::node_class;
  else throw std::runtime_error(path + ": unknown mode '" + value + "'");
  in >> key >> m.input_dim;
  in >> key >> m.config.hidden_dim;
  in >> key >> m.config.learning_rate;
  in >> key >> m.config.epochs;
  in >> key >> m.config.seed;
  int cw = 1;
  in >> key >> cw;
  m.config.class_weight = cw != 0;
  in >> key >> m.config.neighbor_cap;
  if (!in) throw std::runtime_error(path + ": malformed header");
  m.layers.resize(2);
  for (int i = 0; i < 2; ++i) {
    m.layers[i].w_self = read_matrix(in, path, "w_self");
    m.layers[i].w_neigh = read_matrix(in, path, "w_neigh");
    Matrix b = read_matrix(in, path, "bias");
    m.layers[i].bias = b.col(0);
  }
  m.head = read_matrix(in, path, "head");
  return m;
}

}  // namespace gnids
