#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lrlab/common.hpp"

namespace lrlab::config {

struct Value {
  enum class Kind { boolean, integer, real, text, int_list, real_list, text_list };

  Kind kind = Kind::integer;
  bool b = false;
  long i = 0;
  double d = 0.0;
  std::string s;
  std::vector<long> il;
  std::vector<double> dl;
  std::vector<std::string> sl;

  static Value boolean(bool v);
  static Value integer(long v);
  static Value real(double v);
  static Value text(std::string v);
  static Value integers(std::vector<long> v);
  static Value reals(std::vector<double> v);
  static Value texts(std::vector<std::string> v);

  // integers satisfy real-typed reads; int lists satisfy real-list reads
  double as_real() const;
  std::vector<double> as_reals() const;
};

using Table = std::map<std::string, Value>;

// Flat TOML subset: `key = value` lines, `#` comments, `[section]` headers
// turning later keys into `section.key`, booleans, integers, floats, basic
// strings, and homogeneous arrays of those scalars. Duplicate keys are
// rejected. Throws config_error with the offending line number.
Table parse_toml(const std::string& text);
Table parse_toml_file(const std::string& path);

struct Field {
  Value::Kind kind = Value::Kind::integer;
  bool required = false;
};

// Unknown keys and type mismatches are config errors; integer values satisfy
// real fields and integer lists satisfy real-list fields.
void check_schema(const Table& cfg, const std::map<std::string, Field>& schema,
                  const std::string& who);

// apply defaults for keys the table does not set
Table with_defaults(Table cfg, const Table& defaults);

// Stable text form (sorted keys, 17-significant-digit reals) and its hash;
// the hash is embedded in every report.
std::string canonical(const Table& cfg);
std::string table_hash(const Table& cfg);  // fnv1a of canonical(), hex

std::string format_real(double x);  // shortest %.17g form

}  // namespace lrlab::config
