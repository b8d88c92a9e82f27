#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gnids {

enum class Label : uint8_t { benign = 0, malicious = 1 };

inline const char* to_string(Label l) { return l == Label::malicious ? "malicious" : "benign"; }

/// One exported flow. Numeric fields are stored as doubles; in_bytes,
/// out_bytes and tot_packets hold integral values until preprocessing
/// rescales them.
struct NetflowRecord {
  std::string src_ip;
  int src_port = 0;
  std::string dst_ip;
  int dst_port = 0;
  double duration = 0.0;
  double in_bytes = 0.0;
  double out_bytes = 0.0;
  double tot_packets = 1.0;
  std::vector<double> extra_features;
  Label label = Label::benign;
  std::string attack_name;  // empty for benign records

  bool operator==(const NetflowRecord&) const = default;
};

/// How a schema turns the label column(s) into {benign, malicious}.
enum class LabelRule {
  benign_malicious_text,  // cell is literally "benign" / "malicious"
  zero_one,               // 0 benign, 1 malicious; attack name from a separate column
  botnet_substring,       // malicious iff the cell contains "Botnet" (CTU-style labels)
};

enum class ColumnRole {
  src_ip,
  src_port,
  dst_ip,
  dst_port,
  duration,
  in_bytes,    // summable: several columns may map here
  out_bytes,   // summable
  tot_packets, // summable
  feature,     // numeric extra feature
  categorical, // string extra feature, dictionary-encoded at load
  label,
  attack_name,
  ignore,
};

struct SchemaColumn {
  std::string name;
  ColumnRole role;
};

/// Declarative mapping from CSV header names to record fields.
struct Schema {
  std::string name;
  std::vector<SchemaColumn> columns;
  LabelRule label_rule = LabelRule::benign_malicious_text;
  bool allow_unlisted_as_feature = false;  // generic schema: unknown columns become features
};

/// Builtins: "generic", "ctu13", "toniot".
Schema builtin_schema(const std::string& name);

/// Schema file: one "column = role" line per column, plus optional
/// "label_rule = ..." and "allow_unlisted = true|false" directives.
Schema load_schema_file(const std::string& path);

struct ExtraColumnInfo {
  std::string name;
  bool is_categorical = false;
  std::vector<std::string> categories;  // dictionary, code = index (categorical only)
};

/// Loaded dataset: the records plus per-extra-column metadata needed for
/// one-hot encoding and for writing categorical values back out.
struct Dataset {
  std::vector<NetflowRecord> records;
  std::vector<ExtraColumnInfo> extra_columns;
};

Dataset load_csv(const std::string& path, const Schema& schema);

/// Writes the generic CSV layout (core fields, extras, label, attack_name).
/// Exact numeric round-trip through load_csv with the generic schema.
void write_csv(const std::string& path, const std::vector<NetflowRecord>& records,
               const std::vector<ExtraColumnInfo>& extra_columns = {},
               const std::string& artifact_kind = "");

/// Enforces record invariants (ports in range, tot_packets >= 1, finite
/// non-negative numerics, constant extra dimension). Throws on violation
/// naming the offending record.
void validate_records(const std::vector<NetflowRecord>& records);

std::string format_double(double v);                 // shortest exact decimal (%.17g trimmed)
double parse_double(const std::string& s, const std::string& context);
int parse_port(const std::string& s, const std::string& context);

}  // namespace gnids
