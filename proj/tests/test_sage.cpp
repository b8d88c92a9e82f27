#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "gnids/graph.hpp"
#include "gnids/rng.hpp"
#include "gnids/sage.hpp"

using namespace gnids;

namespace {

NetflowRecord flow(const std::string& s, int sp, const std::string& d, int dp,
                   Label l = Label::benign, double duration = 0.5) {
  NetflowRecord r;
  r.src_ip = s;
  r.src_port = sp;
  r.dst_ip = d;
  r.dst_port = dp;
  r.duration = duration;
  r.in_bytes = 0.3;
  r.out_bytes = 0.7;
  r.tot_packets = 1;
  r.label = l;
  return r;
}

std::vector<NetflowRecord> random_flows(Rng& rng, int n_edges, int n_endpoints = 6) {
  std::uniform_int_distribution<int> ep(0, n_endpoints - 1);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::vector<NetflowRecord> out;
  for (int e = 0; e < n_edges; ++e) {
    int a = ep(rng), b = ep(rng);
    if (a == b) b = (b + 1) % n_endpoints;
    auto r = flow("h" + std::to_string(a), a, "h" + std::to_string(b), b,
                  unit(rng) < 0.4 ? Label::malicious : Label::benign, unit(rng));
    r.in_bytes = unit(rng);
    r.out_bytes = unit(rng);
    r.tot_packets = unit(rng);
    out.push_back(std::move(r));
  }
  // both classes present
  out.front().label = Label::benign;
  out.back().label = Label::malicious;
  return out;
}

std::vector<Label> labels_of(const std::vector<NetflowRecord>& records) {
  std::vector<Label> out;
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

SageConfig tiny_config(uint64_t seed, int hidden = 8) {
  SageConfig c;
  c.hidden_dim = hidden;
  c.learning_rate = 0.05;
  c.epochs = 60;
  c.seed = seed;
  return c;
}

bool models_identical(const SageModel& a, const SageModel& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].w_self != b.layers[i].w_self) return false;
    if (a.layers[i].w_neigh != b.layers[i].w_neigh) return false;
    if (a.layers[i].bias != b.layers[i].bias) return false;
  }
  return a.head == b.head;
}

/// Plain logistic regression trained by gradient descent; the independent
/// oracle confirming a fixture is linearly separable before the GNN is
/// required to fit it.
double logistic_regression_accuracy(const Matrix& X, const std::vector<Label>& y, int epochs,
                                    double lr) {
  Vector w = Vector::Zero(X.cols());
  double b = 0.0;
  const int n = static_cast<int>(X.rows());
  for (int e = 0; e < epochs; ++e) {
    Vector z = X * w + Vector::Constant(n, b);
    Vector p = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    Vector t(n);
    for (int i = 0; i < n; ++i) t[i] = y[i] == Label::malicious ? 1.0 : 0.0;
    Vector diff = p - t;
    w -= lr * (X.transpose() * diff) / n;
    b -= lr * diff.sum() / n;
  }
  Vector z = X * w + Vector::Constant(n, b);
  int correct = 0;
  for (int i = 0; i < n; ++i)
    correct += ((z[i] > 0) == (y[i] == Label::malicious)) ? 1 : 0;
  return static_cast<double>(correct) / n;
}

}  // namespace

TEST_CASE("logit shapes follow the target counts") {
  FlowGraph g = build_flow_graph({flow("a", 1, "b", 2)}, {});
  SageModel m = make_sage_model(SageMode::edge_class, 4, tiny_config(1));
  Matrix z = egraphsage_forward(m, g);
  CHECK(z.rows() == 1);
  CHECK(z.cols() == 2);

  LineGraph lg = linearize(g);
  SageModel nm = make_sage_model(SageMode::node_class, 4, tiny_config(1));
  Matrix nz = linegraphsage_forward(nm, lg);
  CHECK(nz.rows() == lg.num_nodes());
  CHECK(nz.cols() == 2);

  CHECK_THROWS_AS(egraphsage_forward(nm, g), std::runtime_error);   // wrong mode
  CHECK_THROWS_AS(linegraphsage_forward(m, lg), std::runtime_error);
}

TEST_CASE("all-zero parameters produce exactly zero logits") {
  Rng rng(3);
  auto records = random_flows(rng, 7);
  FlowGraph g = build_flow_graph(records, {});
  SageModel m = make_sage_model(SageMode::edge_class, 4, tiny_config(1));
  for (auto& l : m.layers) {
    l.w_self.setZero();
    l.w_neigh.setZero();
    l.bias.setZero();
  }
  m.head.setZero();
  Matrix z = egraphsage_forward(m, g);
  CHECK((z.array() == 0.0).all());
}

TEST_CASE("permuting the record order permutes edge logits identically") {
  Rng rng(11);
  auto records = random_flows(rng, 10);
  FlowGraph g = build_flow_graph(records, {});
  SageModel m = make_sage_model(SageMode::edge_class, 4, tiny_config(5));
  Matrix z = egraphsage_forward(m, g);

  std::vector<int> perm(records.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<NetflowRecord> shuffled;
  for (int i : perm) shuffled.push_back(records[i]);
  FlowGraph g2 = build_flow_graph(shuffled, {});
  Matrix z2 = egraphsage_forward(m, g2);

  for (size_t k = 0; k < perm.size(); ++k) {
    CHECK(z2(k, 0) == doctest::Approx(z(perm[k], 0)).epsilon(1e-9));
    CHECK(z2(k, 1) == doctest::Approx(z(perm[k], 1)).epsilon(1e-9));
  }
}

TEST_CASE("line-graph receptive field is exactly two hops") {
  // chain 0-1-2-3-4 built from a path of flows
  std::vector<NetflowRecord> records;
  for (int i = 0; i < 5; ++i)
    records.push_back(flow("n" + std::to_string(i), 1, "n" + std::to_string(i + 1), 1,
                           Label::benign, 0.1 + 0.1 * i));
  FlowGraph g = build_flow_graph(records, {});
  LineGraph lg = linearize(g);
  SageModel m = make_sage_model(SageMode::node_class, 4, tiny_config(7));
  Matrix base = linegraphsage_forward(m, lg);

  for (int changed : {3, 4}) {  // >= 3 hops from node 0
    LineGraph far = lg;
    far.node_features(changed, 0) += 5.0;
    Matrix z = linegraphsage_forward(m, far);
    CHECK(z(0, 0) == base(0, 0));  // bitwise: the contribution never enters
    CHECK(z(0, 1) == base(0, 1));
  }
  LineGraph near = lg;
  near.node_features(2, 0) += 5.0;  // 2 hops away: inside the field
  Matrix z = linegraphsage_forward(m, near);
  CHECK(z(0, 0) != base(0, 0));
}

TEST_CASE("isolated line nodes classify on their own features only") {
  // disjoint edges -> every line node isolated
  std::vector<NetflowRecord> records;
  for (int i = 0; i < 4; ++i)
    records.push_back(flow("a" + std::to_string(i), 1, "b" + std::to_string(i), 1, Label::benign,
                           0.2 * i));
  LineGraph lg = linearize(build_flow_graph(records, {}));
  for (const auto& nbrs : lg.adjacency) REQUIRE(nbrs.empty());
  SageModel m = make_sage_model(SageMode::node_class, 4, tiny_config(9));
  Matrix base = linegraphsage_forward(m, lg);
  LineGraph touched = lg;
  touched.node_features(1, 0) += 3.0;
  Matrix z = linegraphsage_forward(m, touched);
  for (int v = 0; v < lg.num_nodes(); ++v) {
    if (v == 1) continue;
    CHECK(z(v, 0) == base(v, 0));
    CHECK(z(v, 1) == base(v, 1));
  }
  CHECK(z(1, 0) != base(1, 0));
}

TEST_CASE("isolated flow-graph node aggregates the zero vector") {
  FlowGraph g = build_flow_graph({flow("a", 1, "b", 2)}, {});
  g.nodes.push_back({"lonely", 9});  // hand-added node with no incident edges
  SageModel m = make_sage_model(SageMode::edge_class, 4, tiny_config(2));
  Matrix z = egraphsage_forward(m, g);  // must not throw
  CHECK(z.rows() == 1);
}

TEST_CASE("training fits a linearly separable toy problem the LR oracle certifies") {
  // disjoint edges; features carry the class
  Rng rng(17);
  std::vector<NetflowRecord> records;
  std::uniform_real_distribution<double> lo(0.0, 0.3), hi(0.7, 1.0);
  for (int i = 0; i < 40; ++i) {
    bool mal = i % 2 == 0;
    auto r = flow("s" + std::to_string(i), 1, "t" + std::to_string(i), 1,
                  mal ? Label::malicious : Label::benign, mal ? hi(rng) : lo(rng));
    r.in_bytes = mal ? hi(rng) : lo(rng);
    r.out_bytes = 0.5;
    r.tot_packets = 0.5;
    records.push_back(std::move(r));
  }
  FlowGraph g = build_flow_graph(records, {});
  auto labels = labels_of(records);

  // oracle first: plain logistic regression separates this data
  Matrix X(records.size(), 4);
  for (size_t i = 0; i < records.size(); ++i)
    X.row(i) << records[i].duration, records[i].in_bytes, records[i].out_bytes,
        records[i].tot_packets;
  CHECK(logistic_regression_accuracy(X, labels, 2000, 0.5) >= 0.99);

  SageConfig cfg = tiny_config(21, 16);
  cfg.epochs = 200;
  SageModel m = make_sage_model(SageMode::edge_class, 4, cfg);
  TrainReport rep = train(m, g, labels);
  const auto& fm = rep.final_train_metrics;
  double acc = static_cast<double>(fm.tp + fm.tn) / records.size();
  CHECK(acc >= 0.99);
  CHECK(rep.epoch_loss.back() <= rep.epoch_loss.front());

  SageModel nm = make_sage_model(SageMode::node_class, 4, cfg);
  TrainReport nrep = train(nm, linearize(g), labels);
  double nacc =
      static_cast<double>(nrep.final_train_metrics.tp + nrep.final_train_metrics.tn) /
      records.size();
  CHECK(nacc >= 0.99);
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  Rng rng(23);
  auto records = random_flows(rng, 12);
  FlowGraph g = build_flow_graph(records, {});
  SageConfig cfg = tiny_config(4);
  cfg.learning_rate = 0.0;
  cfg.epochs = 10;
  SageModel m = make_sage_model(SageMode::edge_class, 4, cfg);
  SageModel before = m;
  TrainReport rep = train(m, g, labels_of(records));
  CHECK(models_identical(m, before));
  for (double l : rep.epoch_loss) CHECK(l == rep.epoch_loss.front());
}

TEST_CASE("training is bit-for-bit deterministic per seed") {
  Rng rng(29);
  auto records = random_flows(rng, 15);
  FlowGraph g = build_flow_graph(records, {});
  auto labels = labels_of(records);
  SageModel a = make_sage_model(SageMode::edge_class, 4, tiny_config(31));
  SageModel b = make_sage_model(SageMode::edge_class, 4, tiny_config(31));
  train(a, g, labels);
  train(b, g, labels);
  CHECK(models_identical(a, b));
}

TEST_CASE("single-class labels and divergence are rejected") {
  Rng rng(37);
  auto records = random_flows(rng, 8);
  FlowGraph g = build_flow_graph(records, {});
  std::vector<Label> all_benign(records.size(), Label::benign);
  SageModel m = make_sage_model(SageMode::edge_class, 4, tiny_config(1));
  CHECK_THROWS_WITH_AS(train(m, g, all_benign), doctest::Contains("single class"),
                       std::runtime_error);

  SageConfig cfg = tiny_config(1);
  cfg.learning_rate = 1e300;
  cfg.epochs = 50;
  SageModel d = make_sage_model(SageMode::edge_class, 4, cfg);
  CHECK_THROWS_WITH_AS(train(d, g, labels_of(records)), doctest::Contains("epoch"),
                       std::runtime_error);
}

TEST_CASE("argmax prediction breaks ties toward benign") {
  Matrix z(3, 2);
  z << 0.2, 0.9,   // malicious
       0.5, 0.5,   // tie -> benign
       0.9, 0.2;   // benign
  auto labels = logits_to_labels(z);
  CHECK(labels[0] == Label::malicious);
  CHECK(labels[1] == Label::benign);
  CHECK(labels[2] == Label::benign);
}

TEST_CASE("softmax rows sum to one within 1e-12") {
  Rng rng(41);
  std::uniform_real_distribution<double> wide(-700.0, 700.0);
  Matrix z(200, 2);
  for (int i = 0; i < z.rows(); ++i) {
    z(i, 0) = wide(rng);
    z(i, 1) = wide(rng);
  }
  Matrix p = softmax_rows(z);
  for (int i = 0; i < p.rows(); ++i) {
    CHECK(std::abs(p.row(i).sum() - 1.0) < 1e-12);
    CHECK(p(i, 0) >= 0.0);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(43);
  for (int trial = 0; trial < 4; ++trial) {
    auto records = random_flows(rng, 10);
    FlowGraph g = build_flow_graph(records, {});
    auto labels = labels_of(records);
    SageModel m = make_sage_model(SageMode::edge_class, 4, tiny_config(100 + trial, 5));
    CHECK(gradient_check(m, g, labels, 1e-5) < 1e-4);

    SageModel nm = make_sage_model(SageMode::node_class, 4, tiny_config(200 + trial, 5));
    CHECK(gradient_check(nm, linearize(g), labels, 1e-5) < 1e-4);
  }
}

TEST_CASE("gradient check with zero weights agrees on bias terms") {
  Rng rng(47);
  auto records = random_flows(rng, 6);
  FlowGraph g = build_flow_graph(records, {});
  SageModel m = make_sage_model(SageMode::edge_class, 4, tiny_config(1, 4));
  for (auto& l : m.layers) {
    l.w_self.setZero();
    l.w_neigh.setZero();
    l.bias.setZero();
  }
  m.head.setZero();
  CHECK(gradient_check(m, g, labels_of(records), 1e-5) < 1e-4);
}

TEST_CASE("epsilon zero is rejected") {
  FlowGraph g = build_flow_graph({flow("a", 1, "b", 2, Label::malicious),
                                  flow("b", 2, "c", 3, Label::benign)}, {});
  SageModel m = make_sage_model(SageMode::edge_class, 4, tiny_config(1, 4));
  CHECK_THROWS_AS(gradient_check(m, g, labels_of({flow("a", 1, "b", 2, Label::malicious),
                                                  flow("b", 2, "c", 3, Label::benign)}),
                                 0.0),
                  std::invalid_argument);
}

TEST_CASE("model files round-trip exactly") {
  SageModel m = make_sage_model(SageMode::edge_class, 6, tiny_config(51, 7));
  auto path = std::filesystem::temp_directory_path() / "gnids_model.txt";
  save_sage_model(path.string(), m);
  SageModel back = load_sage_model(path.string());
  CHECK(models_identical(m, back));
  CHECK(back.mode == m.mode);
  CHECK(back.input_dim == m.input_dim);
  CHECK(back.config.hidden_dim == m.config.hidden_dim);
  CHECK(back.config.learning_rate == m.config.learning_rate);
  CHECK(back.config.seed == m.config.seed);
}

TEST_CASE("a trained model embeds a disjoint unseen graph (inductive contract)") {
  Rng rng(53);
  auto records = random_flows(rng, 14);
  FlowGraph g = build_flow_graph(records, {});
  SageModel m = make_sage_model(SageMode::edge_class, 4, tiny_config(55));
  train(m, g, labels_of(records));

  std::vector<NetflowRecord> unseen;
  for (int i = 0; i < 9; ++i)
    unseen.push_back(flow("new" + std::to_string(i), 7, "other" + std::to_string(i % 3), 8,
                          Label::benign, 0.1 * i));
  FlowGraph g2 = build_flow_graph(unseen, {});
  Matrix z = egraphsage_forward(m, g2);  // no retraining required
  CHECK(z.rows() == 9);
  CHECK(z.allFinite());
}

TEST_CASE("neighbor cap keeps forward deterministic") {
  Rng rng(59);
  auto records = random_flows(rng, 30, 4);  // dense: caps actually bind
  FlowGraph g = build_flow_graph(records, {});
  SageConfig cfg = tiny_config(61);
  cfg.neighbor_cap = 3;
  SageModel m = make_sage_model(SageMode::edge_class, 4, cfg);
  Matrix a = egraphsage_forward(m, g);
  Matrix b = egraphsage_forward(m, g);
  CHECK(a == b);
}
