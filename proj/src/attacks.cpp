#include "gnids/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "gnids/rng.hpp"

namespace gnids {

const char* to_string(AttackableFeature f) {
  switch (f) {
    case AttackableFeature::duration: return "duration";
    case AttackableFeature::in_bytes: return "in_bytes";
    case AttackableFeature::out_bytes: return "out_bytes";
    case AttackableFeature::tot_packets: return "tot_packets";
  }
  return "?";
}

std::string FeatureAttackSpec::group_name() const {
  std::string s;
  for (auto f : group) {
    if (!s.empty()) s += '+';
    s += to_string(f);
  }
  return s;
}

std::vector<double> default_feature_steps() {
  return {1, 2, 4, 8, 16, 64, 256, 512, 1024};
}

std::vector<FeatureAttackSpec> feature_attack_grid(const std::vector<double>& steps) {
  const AttackableFeature feats[] = {AttackableFeature::duration, AttackableFeature::in_bytes,
                                     AttackableFeature::out_bytes, AttackableFeature::tot_packets};
  std::vector<FeatureAttackSpec> grid;
  for (int mask = 1; mask < 16; ++mask) {
    FeatureAttackSpec spec;
    for (int b = 0; b < 4; ++b)
      if (mask & (1 << b)) spec.group.push_back(feats[b]);
    for (double s : steps) {
      spec.step_value = s;
      grid.push_back(spec);
    }
  }
  return grid;
}

std::vector<NetflowRecord> all_records(const AttackResult& r) {
  std::vector<NetflowRecord> out = r.perturbed_records;
  out.insert(out.end(), r.added_records.begin(), r.added_records.end());
  return out;
}

AttackResult feature_attack(const std::vector<NetflowRecord>& test,
                            const FeatureAttackSpec& spec) {
  if (spec.group.empty()) throw std::runtime_error("feature_attack: empty feature group");
  if (!(spec.step_value > 0.0))
    throw std::runtime_error("feature_attack: step_value must be positive");
  AttackResult result;
  result.perturbed_records = test;
  for (auto& r : result.perturbed_records) {
    if (r.label != Label::malicious) continue;
    for (auto f : spec.group) {
      switch (f) {
        case AttackableFeature::duration:
          r.duration += spec.step_value;
          break;
        case AttackableFeature::in_bytes:
          r.in_bytes = std::round(r.in_bytes + spec.step_value);
          break;
        case AttackableFeature::out_bytes:
          r.out_bytes = std::round(r.out_bytes + spec.step_value);
          break;
        case AttackableFeature::tot_packets:
          r.tot_packets = std::round(r.tot_packets + spec.step_value);
          break;
      }
    }
  }
  return result;
}

namespace {

std::vector<int> pool_indices(const std::vector<NetflowRecord>& test, Label wanted) {
  std::vector<int> out;
  for (size_t i = 0; i < test.size(); ++i)
    if (test[i].label == wanted) out.push_back(static_cast<int>(i));
  return out;
}

/// count draws from pool: without replacement when the pool is large
/// enough, with replacement otherwise.
std::vector<int> draw(const std::vector<int>& pool, int count, Rng& rng) {
  if (static_cast<int>(pool.size()) >= count) {
    std::vector<int> picks = sample_without_replacement(static_cast<int>(pool.size()), count, rng);
    for (int& p : picks) p = pool[p];
    return picks;
  }
  std::vector<int> picks(count);
  std::uniform_int_distribution<int> d(0, static_cast<int>(pool.size()) - 1);
  for (int i = 0; i < count; ++i) picks[i] = pool[d(rng)];
  return picks;
}

std::vector<Endpoint> canonical(std::vector<Endpoint> eps) {
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  return eps;
}

}  // namespace

AttackResult c2x_benign(const std::vector<NetflowRecord>& test,
                        const std::vector<Endpoint>& compromised, int beta, uint64_t seed) {
  if (beta < 1)
    throw std::runtime_error("c2x_benign: beta must be a positive count (0 is the baseline graph)");
  if (compromised.empty()) throw std::runtime_error("c2x_benign: compromised set is empty");
  std::vector<int> benign_pool = pool_indices(test, Label::benign);
  if (benign_pool.empty()) throw std::runtime_error("c2x_benign: benign pool is empty");

  AttackResult result;
  result.perturbed_records = test;
  Rng rng(derive_seed(seed, "c2x-benign"));
  for (const Endpoint& node : canonical(compromised)) {
    for (int pick : draw(benign_pool, beta, rng)) {
      NetflowRecord clone = test[pick];
      clone.src_ip = node.ip;
      clone.src_port = node.port;
      result.added_records.push_back(std::move(clone));
      result.provenance.push_back({"c2x_benign", pick});
    }
  }
  return result;
}

AttackResult c2x_malicious(const std::vector<NetflowRecord>& test,
                           const std::vector<Endpoint>& compromised, int theta, uint64_t seed) {
  if (theta < 1)
    throw std::runtime_error("c2x_malicious: theta must be a positive count");
  if (compromised.empty()) throw std::runtime_error("c2x_malicious: compromised set is empty");
  std::vector<int> mal_pool = pool_indices(test, Label::malicious);
  std::vector<int> benign_pool = pool_indices(test, Label::benign);
  if (mal_pool.empty()) throw std::runtime_error("c2x_malicious: malicious pool is empty");
  if (benign_pool.empty()) throw std::runtime_error("c2x_malicious: benign pool is empty");

  AttackResult result;
  result.perturbed_records = test;
  Rng rng(derive_seed(seed, "c2x-malicious"));
  for ([[maybe_unused]] const Endpoint& node : canonical(compromised)) {
    // theta malicious clones; destinations come from theta benign draws.
    std::vector<int> mal_picks = draw(mal_pool, theta, rng);
    std::vector<int> ben_picks = draw(benign_pool, theta, rng);
    for (int k = 0; k < theta; ++k) {
      NetflowRecord clone = test[mal_picks[k]];
      clone.dst_ip = test[ben_picks[k]].dst_ip;
      clone.dst_port = test[ben_picks[k]].dst_port;
      result.added_records.push_back(std::move(clone));
      result.provenance.push_back({"c2x_malicious", mal_picks[k]});
    }
  }
  return result;
}

AttackResult add_node_attack(const std::vector<NetflowRecord>& test,
                             const std::vector<Endpoint>& compromised,
                             const std::set<Endpoint>& existing, const AddNodeSpec& spec) {
  if (spec.eta < 1 || spec.gamma < 1)
    throw std::runtime_error("add_node_attack: eta and gamma must be positive");
  if (compromised.empty()) throw std::runtime_error("add_node_attack: compromised set is empty");
  std::vector<int> benign_pool = pool_indices(test, Label::benign);
  if (benign_pool.empty()) throw std::runtime_error("add_node_attack: benign pool is empty");

  // Fresh endpoints from the reserved documentation ranges, skipping any
  // collision with endpoints already in the dataset.
  const char* doc_ranges[] = {"192.0.2.", "198.51.100.", "203.0.113."};
  constexpr int64_t kEndpointSpace = 3LL * 254 * (65535 - 40000 + 1);
  if (spec.eta > kEndpointSpace)
    throw std::runtime_error("add_node_attack: endpoint space exhausted; cannot mint " +
                             std::to_string(spec.eta) + " fresh endpoints");
  std::vector<Endpoint> fresh;
  fresh.reserve(spec.eta);
  for (int port = 40000; port <= 65535 && static_cast<int>(fresh.size()) < spec.eta; ++port) {
    for (const char* range : doc_ranges) {
      for (int h = 1; h <= 254; ++h) {
        Endpoint cand{std::string(range) + std::to_string(h), port};
        if (existing.count(cand)) continue;
        fresh.push_back(std::move(cand));
        if (static_cast<int>(fresh.size()) == spec.eta) break;
      }
      if (static_cast<int>(fresh.size()) == spec.eta) break;
    }
  }
  if (static_cast<int>(fresh.size()) < spec.eta)
    throw std::runtime_error("add_node_attack: endpoint space exhausted; cannot mint " +
                             std::to_string(spec.eta) + " fresh endpoints");

  std::vector<Endpoint> comp = canonical(compromised);
  AttackResult result;
  result.perturbed_records = test;
  Rng rng(derive_seed(spec.seed, "add-node"));
  std::uniform_int_distribution<int> pick_comp(0, static_cast<int>(comp.size()) - 1);
  for (const Endpoint& fresh_node : fresh) {
    for (int pick : draw(benign_pool, spec.gamma, rng)) {
      NetflowRecord clone = test[pick];
      const Endpoint& source = comp[pick_comp(rng)];
      clone.src_ip = source.ip;
      clone.src_port = source.port;
      clone.dst_ip = fresh_node.ip;
      clone.dst_port = fresh_node.port;
      result.added_records.push_back(std::move(clone));
      result.provenance.push_back({"add_node", pick});
    }
  }
  return result;
}

AttackResult u2x_attack() {
  throw ExcludedAttackError(
      "U2x excluded: anti-spoofing assumption (source-IP spoofing is required and commonly "
      "blocked)");
}

void write_attack_csv(const std::string& path, const AttackResult& result,
                      const std::vector<ExtraColumnInfo>& extra_columns) {
  // Reuse the generic layout and append provenance columns.
  std::ofstream out(path + ".tmp");
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# gnids attack v1\n";
  size_t n_extras = result.perturbed_records.empty()
                        ? extra_columns.size()
                        : result.perturbed_records.front().extra_features.size();
  out << "src_ip,src_port,dst_ip,dst_port,duration,in_bytes,out_bytes,tot_packets";
  for (size_t j = 0; j < n_extras; ++j) {
    if (j < extra_columns.size() && !extra_columns[j].name.empty())
      out << ',' << extra_columns[j].name;
    else
      out << ",f" << j;
  }
  out << ",label,attack_name,source_rule,original_flow_id\n";
  auto emit = [&](const NetflowRecord& r, const std::string& rule, int64_t orig) {
    out << r.src_ip << ',' << r.src_port << ',' << r.dst_ip << ',' << r.dst_port << ','
        << format_double(r.duration) << ',' << format_double(r.in_bytes) << ','
        << format_double(r.out_bytes) << ',' << format_double(r.tot_packets);
    for (double v : r.extra_features) out << ',' << format_double(v);
    out << ',' << to_string(r.label) << ',' << r.attack_name << ',' << rule << ',';
    if (orig >= 0) out << orig;
    out << '\n';
  };
  for (const auto& r : result.perturbed_records) emit(r, "original", -1);
  for (size_t i = 0; i < result.added_records.size(); ++i)
    emit(result.added_records[i], result.provenance[i].source_rule,
         result.provenance[i].original_flow_id);
  if (!out) throw std::runtime_error("write failed for " + path);
  out.close();
  std::filesystem::rename(path + ".tmp", path);
}

}  // namespace gnids
