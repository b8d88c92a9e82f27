#include "gnids/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gnids {

bool NormalizationParams::operator==(const NormalizationParams& o) const {
  if (core_min != o.core_min || core_max != o.core_max || feature_dim != o.feature_dim ||
      extras.size() != o.extras.size())
    return false;
  for (size_t i = 0; i < extras.size(); ++i) {
    const auto& a = extras[i];
    const auto& b = o.extras[i];
    if (a.is_categorical != b.is_categorical || a.min != b.min || a.max != b.max ||
        a.train_codes != b.train_codes)
      return false;
  }
  return true;
}

namespace {

double scale_clip(double v, double lo, double hi) {
  if (hi <= lo) return 0.0;  // constant column in train
  double s = (v - lo) / (hi - lo);
  return std::clamp(s, 0.0, 1.0);
}

void check_finite(const NetflowRecord& r, size_t index) {
  auto bad = [&](const char* what) {
    throw std::runtime_error("record " + std::to_string(index) + ": non-finite " + what);
  };
  if (!std::isfinite(r.duration)) bad("duration");
  if (!std::isfinite(r.in_bytes)) bad("in_bytes");
  if (!std::isfinite(r.out_bytes)) bad("out_bytes");
  if (!std::isfinite(r.tot_packets)) bad("tot_packets");
  for (double v : r.extra_features)
    if (!std::isfinite(v)) bad("extra feature");
}

std::vector<NetflowRecord> apply_params(const std::vector<NetflowRecord>& records,
                                        const NormalizationParams& p) {
  std::vector<NetflowRecord> out;
  out.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    check_finite(records[i], i);
    NetflowRecord r = records[i];
    if (r.extra_features.size() != p.extras.size())
      throw std::runtime_error("record " + std::to_string(i) + ": expected " +
                               std::to_string(p.extras.size()) + " extra features, got " +
                               std::to_string(r.extra_features.size()));
    r.duration = scale_clip(r.duration, p.core_min[0], p.core_max[0]);
    r.in_bytes = scale_clip(r.in_bytes, p.core_min[1], p.core_max[1]);
    r.out_bytes = scale_clip(r.out_bytes, p.core_min[2], p.core_max[2]);
    r.tot_packets = scale_clip(r.tot_packets, p.core_min[3], p.core_max[3]);
    std::vector<double> extras;
    for (size_t j = 0; j < p.extras.size(); ++j) {
      const auto& t = p.extras[j];
      double v = records[i].extra_features[j];
      if (t.is_categorical) {
        // One-hot over train codes; unseen codes map to the all-zero block.
        int code = static_cast<int>(v);
        for (int c : t.train_codes) extras.push_back(c == code ? 1.0 : 0.0);
      } else {
        extras.push_back(scale_clip(v, t.min, t.max));
      }
    }
    r.extra_features = std::move(extras);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::pair<std::vector<NetflowRecord>, NormalizationParams> preprocess_fit(
    const std::vector<NetflowRecord>& train, const std::vector<int>& categorical_extras) {
  if (train.empty()) throw std::runtime_error("preprocess_fit: empty training set");
  size_t n_extras = train.front().extra_features.size();

  NormalizationParams p;
  p.core_min.setConstant(std::numeric_limits<double>::infinity());
  p.core_max.setConstant(-std::numeric_limits<double>::infinity());
  p.extras.resize(n_extras);
  for (int idx : categorical_extras) {
    if (idx < 0 || idx >= static_cast<int>(n_extras))
      throw std::runtime_error("preprocess_fit: categorical index out of range");
    p.extras[idx].is_categorical = true;
  }
  std::vector<std::set<int>> code_sets(n_extras);
  for (auto& t : p.extras)
    if (!t.is_categorical) {
      t.min = std::numeric_limits<double>::infinity();
      t.max = -std::numeric_limits<double>::infinity();
    }

  for (size_t i = 0; i < train.size(); ++i) {
    const auto& r = train[i];
    check_finite(r, i);
    if (r.extra_features.size() != n_extras)
      throw std::runtime_error("record " + std::to_string(i) + ": inconsistent feature dimension");
    Eigen::Vector4d core(r.duration, r.in_bytes, r.out_bytes, r.tot_packets);
    p.core_min = p.core_min.cwiseMin(core);
    p.core_max = p.core_max.cwiseMax(core);
    for (size_t j = 0; j < n_extras; ++j) {
      if (p.extras[j].is_categorical)
        code_sets[j].insert(static_cast<int>(r.extra_features[j]));
      else {
        p.extras[j].min = std::min(p.extras[j].min, r.extra_features[j]);
        p.extras[j].max = std::max(p.extras[j].max, r.extra_features[j]);
      }
    }
  }
  p.feature_dim = 4;
  for (size_t j = 0; j < n_extras; ++j) {
    if (p.extras[j].is_categorical) {
      p.extras[j].train_codes.assign(code_sets[j].begin(), code_sets[j].end());
      p.feature_dim += static_cast<int>(p.extras[j].train_codes.size());
    } else {
      p.feature_dim += 1;
    }
  }
  return {apply_params(train, p), p};
}

std::vector<NetflowRecord> preprocess_apply(const std::vector<NetflowRecord>& records,
                                            const NormalizationParams& params) {
  return apply_params(records, params);
}

Eigen::VectorXd feature_vector(const NetflowRecord& r) {
  Eigen::VectorXd v(4 + r.extra_features.size());
  v[0] = r.duration;
  v[1] = r.in_bytes;
  v[2] = r.out_bytes;
  v[3] = r.tot_packets;
  for (size_t j = 0; j < r.extra_features.size(); ++j) v[4 + j] = r.extra_features[j];
  return v;
}

Eigen::MatrixXd feature_matrix(const std::vector<NetflowRecord>& records) {
  if (records.empty()) return Eigen::MatrixXd(0, 4);
  Eigen::MatrixXd m(records.size(), 4 + records.front().extra_features.size());
  for (size_t i = 0; i < records.size(); ++i) m.row(i) = feature_vector(records[i]).transpose();
  return m;
}

void save_normalization(const std::string& path, const NormalizationParams& p) {
  std::ofstream out(path + ".tmp");
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "gnids-norm v1\n";
  out << "core_min";
  for (int i = 0; i < 4; ++i) out << ' ' << format_double(p.core_min[i]);
  out << "\ncore_max";
  for (int i = 0; i < 4; ++i) out << ' ' << format_double(p.core_max[i]);
  out << "\nextras " << p.extras.size() << '\n';
  for (const auto& t : p.extras) {
    if (t.is_categorical) {
      out << "categorical";
      for (int c : t.train_codes) out << ' ' << c;
      out << '\n';
    } else {
      out << "numeric " << format_double(t.min) << ' ' << format_double(t.max) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
  out.close();
  std::filesystem::rename(path + ".tmp", path);
}

NormalizationParams load_normalization(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, version;
  in >> tag >> version;
  if (tag != "gnids-norm" || version != "v1")
    throw std::runtime_error(path + ": not a gnids-norm v1 file");
  NormalizationParams p;
  std::string key;
  in >> key;
  for (int i = 0; i < 4; ++i) in >> p.core_min[i];
  in >> key;
  for (int i = 0; i < 4; ++i) in >> p.core_max[i];
  size_t n = 0;
  in >> key >> n;
  std::string rest;
  std::getline(in, rest);
  p.feature_dim = 4;
  for (size_t j = 0; j < n; ++j) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated extras section");
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    ExtraTransform t;
    if (kind == "categorical") {
      t.is_categorical = true;
      int c;
      while (ls >> c) t.train_codes.push_back(c);
      p.feature_dim += static_cast<int>(t.train_codes.size());
    } else if (kind == "numeric") {
      ls >> t.min >> t.max;
      p.feature_dim += 1;
    } else {
      throw std::runtime_error(path + ": bad extra transform '" + kind + "'");
    }
    p.extras.push_back(std::move(t));
  }
  if (!in) throw std::runtime_error(path + ": parse error");
  return p;
}

}  // namespace gnids
