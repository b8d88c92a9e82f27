#include "gnids/netflow.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gnids {

std::string format_double(double v) {
  // Shortest decimal that parses back to the same double.
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

double parse_double(const std::string& s, const std::string& context) {
  const char* b = s.data();
  const char* e = b + s.size();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || s.empty())
    throw std::runtime_error(context + ": cannot parse numeric value '" + s + "'");
  return v;
}

int parse_port(const std::string& s, const std::string& context) {
  if (s.empty()) return 0;  // Argus leaves ports blank for some protocols
  int v = 0;
  std::from_chars_result r{};
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X'))
    r = std::from_chars(s.data() + 2, s.data() + s.size(), v, 16);
  else
    r = std::from_chars(s.data(), s.data() + s.size(), v, 10);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw std::runtime_error(context + ": cannot parse port '" + s + "'");
  if (v < 0 || v > 65535)
    throw std::runtime_error(context + ": port " + std::to_string(v) + " out of range 0..65535");
  return v;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

ColumnRole role_from_string(const std::string& s, const std::string& context) {
  static const std::map<std::string, ColumnRole> table = {
      {"src_ip", ColumnRole::src_ip},       {"src_port", ColumnRole::src_port},
      {"dst_ip", ColumnRole::dst_ip},       {"dst_port", ColumnRole::dst_port},
      {"duration", ColumnRole::duration},   {"in_bytes", ColumnRole::in_bytes},
      {"out_bytes", ColumnRole::out_bytes}, {"tot_packets", ColumnRole::tot_packets},
      {"feature", ColumnRole::feature},     {"categorical", ColumnRole::categorical},
      {"label", ColumnRole::label},         {"attack_name", ColumnRole::attack_name},
      {"ignore", ColumnRole::ignore},
  };
  auto it = table.find(lower(s));
  if (it == table.end()) throw std::runtime_error(context + ": unknown column role '" + s + "'");
  return it->second;
}

}  // namespace

Schema builtin_schema(const std::string& name) {
  Schema s;
  s.name = name;
  if (name == "generic") {
    s.columns = {
        {"src_ip", ColumnRole::src_ip},     {"src_port", ColumnRole::src_port},
        {"dst_ip", ColumnRole::dst_ip},     {"dst_port", ColumnRole::dst_port},
        {"duration", ColumnRole::duration}, {"in_bytes", ColumnRole::in_bytes},
        {"out_bytes", ColumnRole::out_bytes}, {"tot_packets", ColumnRole::tot_packets},
        {"label", ColumnRole::label},       {"attack_name", ColumnRole::attack_name},
    };
    s.label_rule = LabelRule::benign_malicious_text;
    s.allow_unlisted_as_feature = true;  // remaining columns become numeric features
    return s;
  }
  if (name == "ctu13") {
    // Argus binetflow layout as shipped with the CTU-13 scenario captures.
    s.columns = {
        {"StartTime", ColumnRole::ignore},  {"Dur", ColumnRole::duration},
        {"Proto", ColumnRole::categorical}, {"SrcAddr", ColumnRole::src_ip},
        {"Sport", ColumnRole::src_port},    {"Dir", ColumnRole::categorical},
        {"DstAddr", ColumnRole::dst_ip},    {"Dport", ColumnRole::dst_port},
        {"State", ColumnRole::categorical}, {"sTos", ColumnRole::feature},
        {"dTos", ColumnRole::feature},      {"TotPkts", ColumnRole::tot_packets},
        {"TotBytes", ColumnRole::in_bytes}, {"SrcBytes", ColumnRole::out_bytes},
        {"Label", ColumnRole::label},
    };
    s.label_rule = LabelRule::botnet_substring;
    return s;
  }
  if (name == "toniot") {
    // NF-ToN-IoT netflow export.
    s.columns = {
        {"IPV4_SRC_ADDR", ColumnRole::src_ip},
        {"L4_SRC_PORT", ColumnRole::src_port},
        {"IPV4_DST_ADDR", ColumnRole::dst_ip},
        {"L4_DST_PORT", ColumnRole::dst_port},
        {"PROTOCOL", ColumnRole::categorical},
        {"L7_PROTO", ColumnRole::feature},
        {"IN_BYTES", ColumnRole::in_bytes},
        {"OUT_BYTES", ColumnRole::out_bytes},
        {"IN_PKTS", ColumnRole::tot_packets},
        {"OUT_PKTS", ColumnRole::tot_packets},
        {"TCP_FLAGS", ColumnRole::feature},
        {"FLOW_DURATION_MILLISECONDS", ColumnRole::duration},
        {"Label", ColumnRole::label},
        {"Attack", ColumnRole::attack_name},
    };
    s.label_rule = LabelRule::zero_one;
    return s;
  }
  throw std::runtime_error("unknown builtin schema '" + name + "' (expected generic, ctu13 or toniot)");
}

Schema load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file " + path);
  Schema s;
  s.name = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'column = role'");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    std::string ctx = path + ":" + std::to_string(lineno);
    if (key == "label_rule") {
      if (val == "benign_malicious_text") s.label_rule = LabelRule::benign_malicious_text;
      else if (val == "zero_one") s.label_rule = LabelRule::zero_one;
      else if (val == "botnet_substring") s.label_rule = LabelRule::botnet_substring;
      else throw std::runtime_error(ctx + ": unknown label_rule '" + val + "'");
    } else if (key == "allow_unlisted") {
      s.allow_unlisted_as_feature = (val == "true" || val == "1");
    } else {
      s.columns.push_back({key, role_from_string(val, ctx)});
    }
  }
  if (s.columns.empty()) throw std::runtime_error(path + ": schema file defines no columns");
  return s;
}

namespace {

struct ColumnBinding {
  ColumnRole role;
  int extra_index = -1;  // for feature/categorical: slot in extra_features
};

Label parse_label(const std::string& cell, LabelRule rule, const std::string& context) {
  switch (rule) {
    case LabelRule::benign_malicious_text: {
      std::string l = lower(trim(cell));
      if (l == "benign") return Label::benign;
      if (l == "malicious") return Label::malicious;
      throw std::runtime_error(context + ": unknown label '" + cell + "'");
    }
    case LabelRule::zero_one: {
      std::string l = trim(cell);
      if (l == "0") return Label::benign;
      if (l == "1") return Label::malicious;
      throw std::runtime_error(context + ": label must be 0 or 1, got '" + cell + "'");
    }
    case LabelRule::botnet_substring:
      return cell.find("Botnet") != std::string::npos ? Label::malicious : Label::benign;
  }
  throw std::logic_error("unreachable label rule");
}

}  // namespace

Dataset load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  int lineno = 0;
  // Skip artifact metadata lines; find the header.
  std::string header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty() && trim(line)[0] != '#') {
      header = line;
      break;
    }
  }
  if (header.empty()) throw std::runtime_error(path + ": empty dataset (no header row)");

  std::vector<std::string> names = split_line(header);
  for (auto& n : names) n = trim(n);

  // Bind each CSV column to a schema role.
  std::vector<ColumnBinding> bind(names.size());
  std::vector<bool> seen_schema_col(schema.columns.size(), false);
  Dataset ds;
  auto add_extra = [&](const std::string& name, bool categorical) {
    ExtraColumnInfo info;
    info.name = name;
    info.is_categorical = categorical;
    ds.extra_columns.push_back(info);
    return static_cast<int>(ds.extra_columns.size()) - 1;
  };
  for (size_t c = 0; c < names.size(); ++c) {
    int schema_idx = -1;
    for (size_t k = 0; k < schema.columns.size(); ++k)
      if (schema.columns[k].name == names[c]) { schema_idx = static_cast<int>(k); break; }
    if (schema_idx < 0) {
      if (!schema.allow_unlisted_as_feature)
        throw std::runtime_error(path + ": column '" + names[c] + "' is not part of schema '" +
                                 schema.name + "'");
      bind[c].role = ColumnRole::feature;
      bind[c].extra_index = add_extra(names[c], false);
      continue;
    }
    if (seen_schema_col[schema_idx])
      throw std::runtime_error(path + ": duplicate column '" + names[c] + "'");
    seen_schema_col[schema_idx] = true;
    bind[c].role = schema.columns[schema_idx].role;
    if (bind[c].role == ColumnRole::feature)
      bind[c].extra_index = add_extra(names[c], false);
    else if (bind[c].role == ColumnRole::categorical)
      bind[c].extra_index = add_extra(names[c], true);
  }
  for (size_t k = 0; k < schema.columns.size(); ++k) {
    if (seen_schema_col[k]) continue;
    ColumnRole r = schema.columns[k].role;
    if (r == ColumnRole::ignore || r == ColumnRole::attack_name) continue;  // optional
    throw std::runtime_error(path + ": missing required column '" + schema.columns[k].name + "'");
  }

  size_t n_extras = ds.extra_columns.size();
  std::vector<std::map<std::string, int>> dictionaries(n_extras);

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    std::string ctx = path + ":" + std::to_string(lineno);
    if (cells.size() != names.size())
      throw std::runtime_error(ctx + ": expected " + std::to_string(names.size()) +
                               " cells, got " + std::to_string(cells.size()));
    NetflowRecord r;
    r.extra_features.assign(n_extras, 0.0);
    for (size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      switch (bind[c].role) {
        case ColumnRole::src_ip: r.src_ip = cell; break;
        case ColumnRole::dst_ip: r.dst_ip = cell; break;
        case ColumnRole::src_port: r.src_port = parse_port(cell, ctx); break;
        case ColumnRole::dst_port: r.dst_port = parse_port(cell, ctx); break;
        case ColumnRole::duration: r.duration = parse_double(cell, ctx); break;
        case ColumnRole::in_bytes: r.in_bytes += parse_double(cell, ctx); break;
        case ColumnRole::out_bytes: r.out_bytes += parse_double(cell, ctx); break;
        case ColumnRole::tot_packets: r.tot_packets += parse_double(cell, ctx); break;
        case ColumnRole::feature:
          r.extra_features[bind[c].extra_index] = parse_double(cell, ctx);
          break;
        case ColumnRole::categorical: {
          auto& dict = dictionaries[bind[c].extra_index];
          auto [it, inserted] = dict.emplace(cell, static_cast<int>(dict.size()));
          r.extra_features[bind[c].extra_index] = static_cast<double>(it->second);
          break;
        }
        case ColumnRole::label: r.label = parse_label(cell, schema.label_rule, ctx); break;
        case ColumnRole::attack_name: r.attack_name = cell; break;
        case ColumnRole::ignore: break;
      }
    }
    // tot_packets accumulates from zero when the schema maps packet columns.
    bool has_pkt_col = false;
    for (const auto& b : bind) has_pkt_col |= (b.role == ColumnRole::tot_packets);
    if (has_pkt_col) r.tot_packets -= 1.0;  // remove the default field value
    if (r.label == Label::benign) r.attack_name.clear();
    if (r.label == Label::malicious && schema.label_rule == LabelRule::botnet_substring &&
        r.attack_name.empty())
      r.attack_name = "botnet";
    ds.records.push_back(std::move(r));
  }

  // Resolve categorical dictionaries (code order is first-appearance order).
  for (size_t j = 0; j < n_extras; ++j) {
    if (!ds.extra_columns[j].is_categorical) continue;
    auto& cats = ds.extra_columns[j].categories;
    cats.resize(dictionaries[j].size());
    for (const auto& [value, code] : dictionaries[j]) cats[code] = value;
  }
  return ds;
}

void write_csv(const std::string& path, const std::vector<NetflowRecord>& records,
               const std::vector<ExtraColumnInfo>& extra_columns,
               const std::string& artifact_kind) {
  std::ofstream out(path + ".tmp");
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!artifact_kind.empty()) out << "# gnids " << artifact_kind << " v1\n";

  size_t n_extras = records.empty() ? extra_columns.size() : records.front().extra_features.size();
  out << "src_ip,src_port,dst_ip,dst_port,duration,in_bytes,out_bytes,tot_packets";
  for (size_t j = 0; j < n_extras; ++j) {
    if (j < extra_columns.size() && !extra_columns[j].name.empty())
      out << ',' << extra_columns[j].name;
    else
      out << ",f" << j;
  }
  out << ",label,attack_name\n";

  for (const auto& r : records) {
    out << r.src_ip << ',' << r.src_port << ',' << r.dst_ip << ',' << r.dst_port << ','
        << format_double(r.duration) << ',' << format_double(r.in_bytes) << ','
        << format_double(r.out_bytes) << ',' << format_double(r.tot_packets);
    for (size_t j = 0; j < r.extra_features.size(); ++j) {
      double v = r.extra_features[j];
      if (j < extra_columns.size() && extra_columns[j].is_categorical) {
        int code = static_cast<int>(v);
        const auto& cats = extra_columns[j].categories;
        if (code >= 0 && code < static_cast<int>(cats.size()))
          out << ',' << cats[code];
        else
          out << ',' << format_double(v);
      } else {
        out << ',' << format_double(v);
      }
    }
    out << ',' << to_string(r.label) << ',' << r.attack_name << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
  out.close();
  std::filesystem::rename(path + ".tmp", path);
}

void validate_records(const std::vector<NetflowRecord>& records) {
  size_t dim = records.empty() ? 0 : records.front().extra_features.size();
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::string ctx = "record " + std::to_string(i);
    auto check_finite = [&](double v, const char* what) {
      if (!std::isfinite(v))
        throw std::runtime_error(ctx + ": " + what + " is not finite");
      if (v < 0.0) throw std::runtime_error(ctx + ": " + what + " is negative");
    };
    check_finite(r.duration, "duration");
    check_finite(r.in_bytes, "in_bytes");
    check_finite(r.out_bytes, "out_bytes");
    if (!std::isfinite(r.tot_packets) || r.tot_packets < 1.0)
      throw std::runtime_error(ctx + ": tot_packets must be >= 1");
    if (r.src_port < 0 || r.src_port > 65535 || r.dst_port < 0 || r.dst_port > 65535)
      throw std::runtime_error(ctx + ": port out of range");
    if (r.extra_features.size() != dim)
      throw std::runtime_error(ctx + ": inconsistent feature dimension");
    for (double v : r.extra_features)
      if (!std::isfinite(v)) throw std::runtime_error(ctx + ": non-finite extra feature");
  }
}

}  // namespace gnids
