#include "lrlab/io.hpp"

#include <cstdio>
#include <fstream>

namespace lrlab::io {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw resource_error("io: cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw resource_error("io: short write to '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw resource_error("io: cannot open '" + path.string() + "'");
  return Json::parse(in);
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) {
  require(width_ > 0, "csv: empty header");
  append(header);
  rows_ = 0;  // header does not count
}

void Csv::append(const std::vector<std::string>& cells) {
  require(cells.size() == width_, "csv: row width mismatch");
  for (size_t k = 0; k < cells.size(); ++k) {
    if (k) text_ += ',';
    text_ += cells[k];
  }
  text_ += '\n';
  ++rows_;
}

void Csv::row(const std::vector<std::string>& cells) { append(cells); }

void Csv::row(const std::vector<double>& cells) {
  std::vector<std::string> out;
  out.reserve(cells.size());
  for (double x : cells) out.push_back(format_double(x));
  append(out);
}

}  // namespace lrlab::io
