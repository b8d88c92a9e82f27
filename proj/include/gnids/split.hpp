#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gnids/netflow.hpp"

namespace gnids {

struct DatasetSplit {
  std::vector<NetflowRecord> train;
  std::vector<NetflowRecord> test;
  std::string attack_name;
  uint64_t seed = 0;
};

/// Partitions records into an 80:20-style split with the benign class
/// subsampled to benign_ratio benign records per malicious record on each
/// side. Malicious records are those whose attack_name matches (all
/// malicious records when attack_name is empty). Deterministic per seed.
DatasetSplit make_split(const std::vector<NetflowRecord>& records, const std::string& attack_name,
                        double train_frac, int benign_ratio, uint64_t seed);

}  // namespace gnids
