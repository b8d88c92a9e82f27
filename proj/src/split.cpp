#include "gnids/split.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gnids/rng.hpp"

namespace gnids {

DatasetSplit make_split(const std::vector<NetflowRecord>& records, const std::string& attack_name,
                        double train_frac, int benign_ratio, uint64_t seed) {
  if (train_frac <= 0.0 || train_frac >= 1.0)
    throw std::runtime_error("make_split: train_frac must be in (0,1), got " +
                             std::to_string(train_frac) + " (both sides must be non-empty)");
  if (benign_ratio < 1) throw std::runtime_error("make_split: benign_ratio must be >= 1");

  std::vector<int> mal_idx, ben_idx;
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.label == Label::malicious) {
      if (attack_name.empty() || r.attack_name == attack_name) mal_idx.push_back(i);
    } else {
      ben_idx.push_back(i);
    }
  }
  if (mal_idx.empty())
    throw std::runtime_error("make_split: no malicious records for attack '" + attack_name + "'");

  int n_mal = static_cast<int>(mal_idx.size());
  int n_mal_train = static_cast<int>(std::lround(train_frac * n_mal));
  n_mal_train = std::clamp(n_mal_train, 1, n_mal - 1);
  int n_mal_test = n_mal - n_mal_train;

  int need_ben = benign_ratio * n_mal;
  if (static_cast<int>(ben_idx.size()) < need_ben)
    throw std::runtime_error("make_split: need " + std::to_string(need_ben) +
                             " benign records for ratio " + std::to_string(benign_ratio) + ":1, have " +
                             std::to_string(ben_idx.size()));

  Rng mal_rng(derive_seed(seed, "split-mal"));
  Rng ben_rng(derive_seed(seed, "split-ben"));
  std::shuffle(mal_idx.begin(), mal_idx.end(), mal_rng);
  std::shuffle(ben_idx.begin(), ben_idx.end(), ben_rng);

  int need_ben_train = benign_ratio * n_mal_train;
  int need_ben_test = benign_ratio * n_mal_test;

  DatasetSplit split;
  split.attack_name = attack_name;
  split.seed = seed;

  std::vector<int> train_ids(mal_idx.begin(), mal_idx.begin() + n_mal_train);
  train_ids.insert(train_ids.end(), ben_idx.begin(), ben_idx.begin() + need_ben_train);
  std::vector<int> test_ids(mal_idx.begin() + n_mal_train, mal_idx.end());
  test_ids.insert(test_ids.end(), ben_idx.begin() + need_ben_train,
                  ben_idx.begin() + need_ben_train + need_ben_test);

  Rng train_rng(derive_seed(seed, "split-train-order"));
  Rng test_rng(derive_seed(seed, "split-test-order"));
  std::shuffle(train_ids.begin(), train_ids.end(), train_rng);
  std::shuffle(test_ids.begin(), test_ids.end(), test_rng);

  split.train.reserve(train_ids.size());
  for (int i : train_ids) split.train.push_back(records[i]);
  split.test.reserve(test_ids.size());
  for (int i : test_ids) split.test.push_back(records[i]);
  return split;
}

}  // namespace gnids
