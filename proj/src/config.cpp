#include "lrlab/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lrlab::config {

Value Value::boolean(bool v) {
  Value out;
  out.kind = Kind::boolean;
  out.b = v;
  return out;
}

Value Value::integer(long v) {
  Value out;
  out.kind = Kind::integer;
  out.i = v;
  return out;
}

Value Value::real(double v) {
  Value out;
  out.kind = Kind::real;
  out.d = v;
  return out;
}

Value Value::text(std::string v) {
  Value out;
  out.kind = Kind::text;
  out.s = std::move(v);
  return out;
}

Value Value::integers(std::vector<long> v) {
  Value out;
  out.kind = Kind::int_list;
  out.il = std::move(v);
  return out;
}

Value Value::reals(std::vector<double> v) {
  Value out;
  out.kind = Kind::real_list;
  out.dl = std::move(v);
  return out;
}

Value Value::texts(std::vector<std::string> v) {
  Value out;
  out.kind = Kind::text_list;
  out.sl = std::move(v);
  return out;
}

double Value::as_real() const {
  if (kind == Kind::real) return d;
  if (kind == Kind::integer) return double(i);
  throw config_error("config: expected a number");
}

std::vector<double> Value::as_reals() const {
  if (kind == Kind::real_list) return dl;
  if (kind == Kind::int_list) return std::vector<double>(il.begin(), il.end());
  throw config_error("config: expected a numeric array");
}

namespace {

[[noreturn]] void fail(long line, const std::string& msg) {
  throw config_error("config line " + std::to_string(line) + ": " + msg);
}

void skip_ws(const std::string& s, size_t& p) {
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
}

std::string parse_basic_string(const std::string& s, size_t& p, long line) {
  std::string out;
  ++p;  // opening quote
  while (p < s.size() && s[p] != '"') {
    char c = s[p++];
    if (c == '\\') {
      if (p >= s.size()) fail(line, "dangling escape in string");
      char e = s[p++];
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        default: fail(line, std::string("unsupported escape \\") + e);
      }
    } else {
      out.push_back(c);
    }
  }
  if (p >= s.size()) fail(line, "unterminated string");
  ++p;  // closing quote
  return out;
}

bool scalar_end(char c) {
  return c == ' ' || c == '\t' || c == ',' || c == ']' || c == '#';
}

// number / boolean token
Value parse_scalar_token(const std::string& tok, long line) {
  if (tok == "true") return Value::boolean(true);
  if (tok == "false") return Value::boolean(false);
  if (tok.empty()) fail(line, "missing value");
  bool real = false;
  for (char c : tok)
    if (c == '.' || c == 'e' || c == 'E') real = true;
  try {
    size_t used = 0;
    if (real) {
      double d = std::stod(tok, &used);
      if (used != tok.size()) fail(line, "malformed number '" + tok + "'");
      return Value::real(d);
    }
    long i = std::stol(tok, &used);
    if (used != tok.size()) fail(line, "malformed integer '" + tok + "'");
    return Value::integer(i);
  } catch (const config_error&) {
    throw;
  } catch (const std::exception&) {
    fail(line, "malformed value '" + tok + "'");
  }
}

Value parse_value(const std::string& s, size_t& p, long line);

Value parse_array(const std::string& s, size_t& p, long line) {
  ++p;  // opening bracket
  std::vector<Value> items;
  while (true) {
    skip_ws(s, p);
    if (p >= s.size()) fail(line, "unterminated array");
    if (s[p] == ']') {
      ++p;
      break;
    }
    items.push_back(parse_value(s, p, line));
    skip_ws(s, p);
    if (p < s.size() && s[p] == ',') {
      ++p;
      continue;
    }
    if (p < s.size() && s[p] == ']') {
      ++p;
      break;
    }
    fail(line, "expected ',' or ']' in array");
  }
  if (items.empty()) return Value::integers({});
  bool all_int = true, all_num = true, all_text = true;
  for (const Value& v : items) {
    all_int &= v.kind == Value::Kind::integer;
    all_num &= v.kind == Value::Kind::integer || v.kind == Value::Kind::real;
    all_text &= v.kind == Value::Kind::text;
  }
  if (all_int) {
    std::vector<long> out;
    for (const Value& v : items) out.push_back(v.i);
    return Value::integers(std::move(out));
  }
  if (all_num) {
    std::vector<double> out;
    for (const Value& v : items) out.push_back(v.as_real());
    return Value::reals(std::move(out));
  }
  if (all_text) {
    std::vector<std::string> out;
    for (const Value& v : items) out.push_back(v.s);
    return Value::texts(std::move(out));
  }
  fail(line, "mixed-type array");
}

Value parse_value(const std::string& s, size_t& p, long line) {
  skip_ws(s, p);
  if (p >= s.size()) fail(line, "missing value");
  if (s[p] == '"') return Value::text(parse_basic_string(s, p, line));
  if (s[p] == '[') return parse_array(s, p, line);
  size_t start = p;
  while (p < s.size() && !scalar_end(s[p])) ++p;
  return parse_scalar_token(s.substr(start, p - start), line);
}

bool key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

}  // namespace

Table parse_toml(const std::string& text) {
  Table out;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  long line = 0;
  while (std::getline(in, raw)) {
    ++line;
    size_t p = 0;
    skip_ws(raw, p);
    if (p >= raw.size() || raw[p] == '#') continue;
    if (raw[p] == '[') {
      size_t close = raw.find(']', p);
      if (close == std::string::npos) fail(line, "unterminated section header");
      section = raw.substr(p + 1, close - p - 1);
      if (section.empty()) fail(line, "empty section name");
      for (char c : section)
        if (!key_char(c)) fail(line, "bad section name '" + section + "'");
      p = close + 1;
      skip_ws(raw, p);
      if (p < raw.size() && raw[p] != '#') fail(line, "trailing text after section");
      continue;
    }
    size_t kstart = p;
    while (p < raw.size() && key_char(raw[p])) ++p;
    std::string key = raw.substr(kstart, p - kstart);
    if (key.empty()) fail(line, "expected a key");
    skip_ws(raw, p);
    if (p >= raw.size() || raw[p] != '=') fail(line, "expected '=' after '" + key + "'");
    ++p;
    Value v = parse_value(raw, p, line);
    skip_ws(raw, p);
    if (p < raw.size() && raw[p] != '#') fail(line, "trailing text after value");
    std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full)) fail(line, "duplicate key '" + full + "'");
    out.emplace(std::move(full), std::move(v));
  }
  return out;
}

Table parse_toml_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

namespace {

const char* kind_name(Value::Kind k) {
  switch (k) {
    case Value::Kind::boolean: return "boolean";
    case Value::Kind::integer: return "integer";
    case Value::Kind::real: return "number";
    case Value::Kind::text: return "string";
    case Value::Kind::int_list: return "integer array";
    case Value::Kind::real_list: return "numeric array";
    case Value::Kind::text_list: return "string array";
  }
  return "?";
}

bool satisfies(Value::Kind have, Value::Kind want) {
  if (have == want) return true;
  if (want == Value::Kind::real && have == Value::Kind::integer) return true;
  if (want == Value::Kind::real_list && have == Value::Kind::int_list) return true;
  return false;
}

}  // namespace

void check_schema(const Table& cfg, const std::map<std::string, Field>& schema,
                  const std::string& who) {
  for (const auto& [key, value] : cfg) {
    auto it = schema.find(key);
    if (it == schema.end())
      throw config_error(who + ": unknown key '" + key + "'");
    if (!satisfies(value.kind, it->second.kind))
      throw config_error(who + ": key '" + key + "' expects " +
                         kind_name(it->second.kind) + ", got " +
                         kind_name(value.kind));
  }
  for (const auto& [key, field] : schema)
    if (field.required && !cfg.count(key))
      throw config_error(who + ": missing required key '" + key + "'");
}

Table with_defaults(Table cfg, const Table& defaults) {
  for (const auto& [key, value] : defaults) cfg.emplace(key, value);
  return cfg;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

void append_canonical(std::string& out, const Value& v) {
  switch (v.kind) {
    case Value::Kind::boolean:
      out += v.b ? "true" : "false";
      break;
    case Value::Kind::integer:
      out += std::to_string(v.i);
      break;
    case Value::Kind::real:
      out += format_real(v.d);
      break;
    case Value::Kind::text:
      out += '"';
      for (char c : v.s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      out += '"';
      break;
    case Value::Kind::int_list:
      out += '[';
      for (size_t k = 0; k < v.il.size(); ++k) {
        if (k) out += ',';
        out += std::to_string(v.il[k]);
      }
      out += ']';
      break;
    case Value::Kind::real_list:
      out += '[';
      for (size_t k = 0; k < v.dl.size(); ++k) {
        if (k) out += ',';
        out += format_real(v.dl[k]);
      }
      out += ']';
      break;
    case Value::Kind::text_list:
      out += '[';
      for (size_t k = 0; k < v.sl.size(); ++k) {
        if (k) out += ',';
        out += '"';
        for (char c : v.sl[k]) {
          if (c == '"' || c == '\\') out += '\\';
          out += c;
        }
        out += '"';
      }
      out += ']';
      break;
  }
}

}  // namespace

std::string canonical(const Table& cfg) {
  std::string out;
  for (const auto& [key, value] : cfg) {
    out += key;
    out += '=';
    append_canonical(out, value);
    out += '\n';
  }
  return out;
}

std::string table_hash(const Table& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical(cfg))));
  return buf;
}

}  // namespace lrlab::config
