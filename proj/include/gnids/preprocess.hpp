#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "gnids/netflow.hpp"

namespace gnids {

/// Per-extra-column transform fitted on training data.
struct ExtraTransform {
  bool is_categorical = false;
  double min = 0.0, max = 0.0;       // numeric columns
  std::vector<int> train_codes;      // categorical: codes seen in train, sorted
};

/// Min-max statistics fitted on a training set. Core order is fixed:
/// duration, in_bytes, out_bytes, tot_packets.
struct NormalizationParams {
  Eigen::Vector4d core_min = Eigen::Vector4d::Zero();
  Eigen::Vector4d core_max = Eigen::Vector4d::Zero();
  std::vector<ExtraTransform> extras;  // one per pre-transform extra column
  int feature_dim = 4;                 // post-transform vector length

  bool operator==(const NormalizationParams&) const;
};

/// Fits scaling statistics on training records only and returns the
/// transformed copy. Values outside the train range are clipped to [0,1]
/// on later application; constant columns scale to 0.
std::pair<std::vector<NetflowRecord>, NormalizationParams> preprocess_fit(
    const std::vector<NetflowRecord>& train,
    const std::vector<int>& categorical_extras = {});

/// Applies previously fitted statistics (test-time path).
std::vector<NetflowRecord> preprocess_apply(const std::vector<NetflowRecord>& records,
                                            const NormalizationParams& params);

/// Feature vector of a (preprocessed) record: core fields then extras.
Eigen::VectorXd feature_vector(const NetflowRecord& r);

/// Feature matrix for a record list, one row per record.
Eigen::MatrixXd feature_matrix(const std::vector<NetflowRecord>& records);

void save_normalization(const std::string& path, const NormalizationParams& params);
NormalizationParams load_normalization(const std::string& path);

}  // namespace gnids
