#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "gnids/attacks.hpp"
#include "gnids/graph.hpp"
#include "gnids/synth.hpp"

using namespace gnids;

namespace {

std::vector<NetflowRecord> fixture_test_set() {
  SynthConfig cfg;
  cfg.n_hosts = 20;
  cfg.n_compromised = 2;
  cfg.benign_flows = 120;
  cfg.malicious_flows = 40;
  cfg.seed = 5;
  return synth_generate(cfg);
}

bool equal_except_src(const NetflowRecord& clone, const NetflowRecord& orig) {
  NetflowRecord c = clone;
  c.src_ip = orig.src_ip;
  c.src_port = orig.src_port;
  return c == orig;
}

bool equal_except_dst(const NetflowRecord& clone, const NetflowRecord& orig) {
  NetflowRecord c = clone;
  c.dst_ip = orig.dst_ip;
  c.dst_port = orig.dst_port;
  return c == orig;
}

bool equal_except_endpoints(const NetflowRecord& clone, const NetflowRecord& orig) {
  NetflowRecord c = clone;
  c.src_ip = orig.src_ip;
  c.src_port = orig.src_port;
  c.dst_ip = orig.dst_ip;
  c.dst_port = orig.dst_port;
  return c == orig;
}

}  // namespace

TEST_CASE("the feature grid enumerates exactly 15 groups x 9 steps") {
  auto grid = feature_attack_grid();
  CHECK(grid.size() == 135);
  std::set<std::string> groups;
  std::set<double> steps;
  for (const auto& spec : grid) {
    groups.insert(spec.group_name());
    steps.insert(spec.step_value);
  }
  CHECK(groups.size() == 15);
  CHECK(steps == std::set<double>{1, 2, 4, 8, 16, 64, 256, 512, 1024});
}

TEST_CASE("feature attack adds the step to malicious records only") {
  std::vector<NetflowRecord> test = fixture_test_set();
  FeatureAttackSpec spec;
  spec.group = {AttackableFeature::duration};
  spec.step_value = 1.0;

  // pin one malicious record to the documented example: duration 2.0 -> 3.0
  for (auto& r : test)
    if (r.label == Label::malicious) {
      r.duration = 2.0;
      break;
    }
  AttackResult res = feature_attack(test, spec);
  REQUIRE(res.perturbed_records.size() == test.size());
  CHECK(res.added_records.empty());
  for (size_t i = 0; i < test.size(); ++i) {
    const auto& before = test[i];
    const auto& after = res.perturbed_records[i];
    CHECK(after.label == before.label);
    if (before.label == Label::malicious) {
      CHECK(after.duration == before.duration + 1.0);
      CHECK(after.in_bytes == before.in_bytes);  // untouched features stay put
    } else {
      CHECK(after == before);
    }
  }
}

TEST_CASE("feature attack on an all-benign set is the identity") {
  std::vector<NetflowRecord> test;
  for (const auto& r : fixture_test_set())
    if (r.label == Label::benign) test.push_back(r);
  FeatureAttackSpec spec;
  spec.group = {AttackableFeature::tot_packets};
  spec.step_value = 8;
  AttackResult res = feature_attack(test, spec);
  CHECK(res.perturbed_records == test);
}

TEST_CASE("byte and packet features round to integers; perturbation is monotone in the step") {
  std::vector<NetflowRecord> test = fixture_test_set();
  double prev_in = -1, prev_pkts = -1;
  for (double step : default_feature_steps()) {
    FeatureAttackSpec spec;
    spec.group = {AttackableFeature::in_bytes, AttackableFeature::tot_packets};
    spec.step_value = step;
    AttackResult res = feature_attack(test, spec);
    for (const auto& r : res.perturbed_records) {
      if (r.label != Label::malicious) continue;
      CHECK(r.in_bytes == std::round(r.in_bytes));
      CHECK(r.tot_packets == std::round(r.tot_packets));
    }
    const auto& first_mal = *std::find_if(res.perturbed_records.begin(),
                                          res.perturbed_records.end(), [](const auto& r) {
                                            return r.label == Label::malicious;
                                          });
    CHECK(first_mal.in_bytes > prev_in);
    CHECK(first_mal.tot_packets > prev_pkts);
    prev_in = first_mal.in_bytes;
    prev_pkts = first_mal.tot_packets;
  }
}

TEST_CASE("c2x benign adds beta clones per compromised node with rewritten sources") {
  auto test = fixture_test_set();
  std::vector<Endpoint> compromised = {{"10.0.0.1", 50001}, {"10.0.0.1", 50002}, {"10.0.0.2", 443}};
  int beta = 2;
  AttackResult res = c2x_benign(test, compromised, beta, 7);

  CHECK(res.perturbed_records == test);  // originals stay verbatim
  REQUIRE(res.added_records.size() == compromised.size() * beta);  // beta * |C|
  std::set<Endpoint> comp_set(compromised.begin(), compromised.end());
  for (size_t i = 0; i < res.added_records.size(); ++i) {
    const auto& a = res.added_records[i];
    CHECK(a.label == Label::benign);
    CHECK(comp_set.count({a.src_ip, a.src_port}) == 1);
    // field-level clone of the provenance record except the source
    const auto& orig = test[res.provenance[i].original_flow_id];
    CHECK(res.provenance[i].source_rule == "c2x_benign");
    CHECK(orig.label == Label::benign);
    CHECK(equal_except_src(a, orig));
  }

  // graph count oracle: edge count grows by exactly beta * |C|
  auto mal_ips = malicious_source_ips(test);
  FlowGraph base = build_flow_graph(test, mal_ips);
  FlowGraph attacked = build_flow_graph(all_records(res), mal_ips);
  CHECK(attacked.num_edges() == base.num_edges() + static_cast<int>(compromised.size()) * beta);

  AttackResult again = c2x_benign(test, compromised, beta, 7);
  CHECK(again.added_records == res.added_records);  // seed determinism
  AttackResult other = c2x_benign(test, compromised, beta, 8);
  CHECK(other.added_records != res.added_records);

  CHECK_THROWS_AS(c2x_benign(test, compromised, 0, 7), std::runtime_error);  // grid: beta >= 1
  CHECK_THROWS_AS(c2x_benign(test, {}, 1, 7), std::runtime_error);
  std::vector<NetflowRecord> no_benign;
  for (const auto& r : test)
    if (r.label == Label::malicious) no_benign.push_back(r);
  CHECK_THROWS_AS(c2x_benign(no_benign, compromised, 1, 7), std::runtime_error);
}

TEST_CASE("c2x malicious adds theta clones per node with benign destinations") {
  auto test = fixture_test_set();
  std::vector<Endpoint> compromised = {{"10.0.0.1", 50001}, {"10.0.0.9", 50002}};
  int theta = 5;
  AttackResult res = c2x_malicious(test, compromised, theta, 11);

  CHECK(res.perturbed_records == test);
  REQUIRE(res.added_records.size() == compromised.size() * theta);  // theta * |C|

  std::set<std::pair<std::string, int>> benign_dsts;
  std::set<std::string> mal_srcs;
  for (const auto& r : test) {
    if (r.label == Label::benign) benign_dsts.insert({r.dst_ip, r.dst_port});
    else mal_srcs.insert(r.src_ip);
  }
  for (size_t i = 0; i < res.added_records.size(); ++i) {
    const auto& a = res.added_records[i];
    CHECK(a.label == Label::malicious);
    CHECK(benign_dsts.count({a.dst_ip, a.dst_port}) == 1);  // destinations from the benign pool
    CHECK(mal_srcs.count(a.src_ip) == 1);                   // sources left unchanged
    const auto& orig = test[res.provenance[i].original_flow_id];
    CHECK(orig.label == Label::malicious);
    CHECK(a.src_ip == orig.src_ip);
    CHECK(a.src_port == orig.src_port);
    CHECK(equal_except_dst(a, orig));
  }

  // incidence oracle: every added edge leaves a compromised node
  auto mal_ips = malicious_source_ips(test);
  FlowGraph attacked = build_flow_graph(all_records(res), mal_ips);
  std::set<int> comp(attacked.compromised.begin(), attacked.compromised.end());
  for (int e = static_cast<int>(test.size()); e < attacked.num_edges(); ++e)
    CHECK(comp.count(attacked.edges[e].src) == 1);
}

TEST_CASE("add-node attack mints eta fresh endpoints with gamma flows each") {
  auto test = fixture_test_set();
  // the genuine compromised set: endpoints of the test graph whose IP
  // sources malicious traffic
  std::vector<Endpoint> compromised =
      compromised_endpoints(build_flow_graph(test, malicious_source_ips(test)));
  REQUIRE(!compromised.empty());
  std::set<Endpoint> existing = collect_endpoints(test);

  SUBCASE("minimal case: one node, one edge") {
    AttackResult res = add_node_attack(test, compromised, existing, {1, 1, 3});
    REQUIRE(res.added_records.size() == 1);
    const auto& a = res.added_records[0];
    CHECK(a.label == Label::benign);
    CHECK(existing.count({a.dst_ip, a.dst_port}) == 0);  // genuinely new endpoint
    bool from_comp = false;
    for (const auto& c : compromised) from_comp |= (c.ip == a.src_ip && c.port == a.src_port);
    CHECK(from_comp);
    const auto& orig = test[res.provenance[0].original_flow_id];
    CHECK(equal_except_endpoints(a, orig));
  }

  SUBCASE("node count grows by exactly eta") {
    AddNodeSpec spec{10, 3, 13};
    AttackResult res = add_node_attack(test, compromised, existing, spec);
    REQUIRE(res.added_records.size() == 30);  // eta * gamma
    auto mal_ips = malicious_source_ips(test);
    FlowGraph base = build_flow_graph(test, mal_ips);
    FlowGraph attacked = build_flow_graph(all_records(res), mal_ips);
    CHECK(attacked.num_nodes() == base.num_nodes() + spec.eta);
  }

  SUBCASE("the largest grid point: 1000 nodes x 20 flows") {
    AddNodeSpec spec{1000, 20, 17};
    AttackResult res = add_node_attack(test, compromised, existing, spec);
    CHECK(res.added_records.size() == 20000);
    std::set<Endpoint> fresh;
    for (const auto& a : res.added_records) fresh.insert({a.dst_ip, a.dst_port});
    CHECK(fresh.size() == 1000);
    for (const auto& e : fresh) CHECK(existing.count(e) == 0);
  }

  SUBCASE("fresh endpoints avoid collisions with a poisoned existing set") {
    std::set<Endpoint> blocked = existing;
    blocked.insert({"192.0.2.1", 40000});  // first candidate the generator would mint
    AttackResult res = add_node_attack(test, compromised, blocked, {1, 1, 3});
    const auto& a = res.added_records[0];
    CHECK(!(a.dst_ip == "192.0.2.1" && a.dst_port == 40000));
  }

  SUBCASE("endpoint-space exhaustion is an error") {
    CHECK_THROWS_WITH_AS(add_node_attack(test, compromised, existing, {30'000'000, 1, 3}),
                         doctest::Contains("exhausted"), std::runtime_error);
  }

  SUBCASE("determinism per seed") {
    AttackResult a = add_node_attack(test, compromised, existing, {5, 2, 19});
    AttackResult b = add_node_attack(test, compromised, existing, {5, 2, 19});
    CHECK(a.added_records == b.added_records);
  }
}

TEST_CASE("structural attacks keep the baseline list as a verbatim prefix") {
  auto test = fixture_test_set();
  std::vector<Endpoint> compromised = {{"10.0.0.1", 50001}};
  std::set<Endpoint> existing = collect_endpoints(test);
  for (const AttackResult& res :
       {c2x_benign(test, compromised, 5, 1), c2x_malicious(test, compromised, 5, 1),
        add_node_attack(test, compromised, existing, {5, 5, 1})}) {
    auto full = all_records(res);
    REQUIRE(full.size() >= test.size());
    for (size_t i = 0; i < test.size(); ++i) CHECK(full[i] == test[i]);
  }
}

TEST_CASE("u2x is excluded by the anti-spoofing assumption") {
  CHECK_THROWS_WITH_AS(u2x_attack(), doctest::Contains("anti-spoofing"), ExcludedAttackError);
}

TEST_CASE("attack csv export carries provenance columns") {
  auto test = fixture_test_set();
  AttackResult res = c2x_benign(test, {{"10.0.0.1", 50001}}, 2, 3);
  auto path = std::filesystem::temp_directory_path() / "gnids_attack.csv";
  write_attack_csv(path.string(), res);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# gnids attack v1");
  std::getline(in, line);
  CHECK(line.find("source_rule,original_flow_id") != std::string::npos);
  size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == test.size() + res.added_records.size());
}
