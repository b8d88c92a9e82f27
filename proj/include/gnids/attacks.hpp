#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "gnids/graph.hpp"
#include "gnids/netflow.hpp"

namespace gnids {

enum class AttackableFeature { duration, in_bytes, out_bytes, tot_packets };

const char* to_string(AttackableFeature f);

/// One feature-attack variant: a feature group and an additive step applied
/// to raw (pre-normalization) feature values of malicious test records.
struct FeatureAttackSpec {
  std::vector<AttackableFeature> group;  // non-empty, ascending, no duplicates
  double step_value = 1.0;

  std::string group_name() const;  // e.g. "duration+in_bytes"
};

/// The 9-step increment schedule: +1 and +1024 endpoints with a geometric
/// fill between them. Configurable per experiment.
std::vector<double> default_feature_steps();

/// All 15 non-empty feature groups crossed with the step schedule
/// (15 x 9 = 135 variants for the default schedule).
std::vector<FeatureAttackSpec> feature_attack_grid(
    const std::vector<double>& steps = default_feature_steps());

struct C2xSpec {
  enum class Variant { benign_traffic, malicious_traffic };
  Variant variant = Variant::benign_traffic;
  int count_per_node = 1;  // beta (benign) or theta (malicious); paper grid {1,2,5,10,20}
  uint64_t seed = 0;
};

struct AddNodeSpec {
  int eta = 1;    // new nodes; paper grid {1,5,10,100,1000}
  int gamma = 1;  // flows per new node; paper grid {1,5,20}
  uint64_t seed = 0;
};

struct AddedProvenance {
  std::string source_rule;     // which attack produced the record
  int64_t original_flow_id;    // index of the cloned test record
};

/// Attack output. Original records are never deleted; structural attacks
/// leave them byte-identical and only append, the feature attack modifies
/// malicious records in place (perturbed_records) and appends nothing.
struct AttackResult {
  std::vector<NetflowRecord> perturbed_records;
  std::vector<NetflowRecord> added_records;
  std::vector<AddedProvenance> provenance;  // parallel to added_records
};

/// perturbed + added, in that order (the attacked test set).
std::vector<NetflowRecord> all_records(const AttackResult& r);

/// Adds spec.step_value to each feature in spec.group of every malicious
/// record; byte/packet features round to integers afterwards. Benign
/// records, labels, count and graph structure are untouched.
AttackResult feature_attack(const std::vector<NetflowRecord>& test, const FeatureAttackSpec& spec);

/// From each compromised node, beta benign flows cloned from the test
/// benign pool with their source rewritten to that node. Adds exactly
/// beta * |compromised| benign records.
AttackResult c2x_benign(const std::vector<NetflowRecord>& test,
                        const std::vector<Endpoint>& compromised, int beta, uint64_t seed);

/// Per compromised node, theta malicious clones whose destinations are
/// swapped with destinations of randomly drawn benign flows; sources stay
/// as sampled. Adds exactly theta * |compromised| malicious records.
AttackResult c2x_malicious(const std::vector<NetflowRecord>& test,
                           const std::vector<Endpoint>& compromised, int theta, uint64_t seed);

/// eta fresh endpoints (documentation address space, disjoint from
/// `existing`), each receiving gamma benign clones re-sourced to random
/// compromised nodes. Adds exactly eta * gamma benign records.
AttackResult add_node_attack(const std::vector<NetflowRecord>& test,
                             const std::vector<Endpoint>& compromised,
                             const std::set<Endpoint>& existing, const AddNodeSpec& spec);

/// U2x needs source-IP spoofing, which anti-spoofing defeats; it is listed
/// but never executed. Always throws ExcludedAttackError.
struct ExcludedAttackError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
AttackResult u2x_attack();

/// Writes the attacked set as CSV with provenance columns appended.
void write_attack_csv(const std::string& path, const AttackResult& result,
                      const std::vector<ExtraColumnInfo>& extra_columns = {});

}  // namespace gnids
