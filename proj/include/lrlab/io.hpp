#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrlab/common.hpp"

namespace lrlab::io {

// insertion-ordered so summaries serialize the same bytes on every run
using Json = nlohmann::ordered_json;

// 17-significant-digit cell format; JSON numbers keep nlohmann's exact
// shortest round-trip form
std::string format_double(double x);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& doc);
Json read_json(const std::filesystem::path& path);

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);

  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& cells);

  long rows() const { return rows_; }
  const std::string& str() const { return text_; }

 private:
  void append(const std::vector<std::string>& cells);

  std::string text_;
  size_t width_ = 0;
  long rows_ = 0;
};

}  // namespace lrlab::io
