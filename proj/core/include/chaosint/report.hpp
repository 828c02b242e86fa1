#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace chaosint {

// Shortest round-trippable decimal form; identical doubles always format to
// identical bytes, which the reproducibility contract relies on.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void add_row(std::vector<std::string> cells);
  std::string str() const;

 private:
  std::vector<std::string> cols_;
  std::vector<std::vector<std::string>> rows_;
};

std::uint64_t fnv1a(const std::string& s);
std::string to_hex(std::uint64_t v);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace chaosint
