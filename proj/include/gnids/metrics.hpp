#pragma once

#include <cstdint>
#include <vector>

#include "gnids/netflow.hpp"

namespace gnids {

/// Confusion-matrix metrics with malicious as the positive class.
struct Metrics {
  double f1 = 0.0;
  double recall = 0.0;  // detection rate
  double precision = 0.0;
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  bool recall_defined = true;  // false when the label set has no positives
};

Metrics compute_metrics(const std::vector<Label>& predictions, const std::vector<Label>& labels);

}  // namespace gnids
