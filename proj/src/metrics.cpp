#include "gnids/metrics.hpp"

#include <stdexcept>

namespace gnids {

Metrics compute_metrics(const std::vector<Label>& predictions, const std::vector<Label>& labels) {
  if (predictions.size() != labels.size())
    throw std::runtime_error("compute_metrics: prediction/label length mismatch");
  Metrics m;
  for (size_t i = 0; i < labels.size(); ++i) {
    bool pred_mal = predictions[i] == Label::malicious;
    bool is_mal = labels[i] == Label::malicious;
    if (pred_mal && is_mal) ++m.tp;
    else if (pred_mal && !is_mal) ++m.fp;
    else if (!pred_mal && is_mal) ++m.fn;
    else ++m.tn;
  }
  if (m.tp + m.fn > 0)
    m.recall = static_cast<double>(m.tp) / (m.tp + m.fn);
  else
    m.recall_defined = false;  // reported as 0 with the flag cleared
  if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / (m.tp + m.fp);
  if (m.precision + m.recall > 0.0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

}  // namespace gnids
