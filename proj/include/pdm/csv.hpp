#pragma once

#include <string>
#include <vector>

namespace pdm {

/// Shortest round-trip decimal representation ('.' separator, no locale).
std::string format_double(double value);

/// RFC 4180 rows with LF endings; numeric cells go through format_double.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);

  void row(const std::vector<std::string>& cells);
  const std::string& text() const { return text_; }

  void write(const std::string& path) const;

private:
  void append_row(const std::vector<std::string>& cells);
  std::size_t columns_;
  std::string text_;
};

}  // namespace pdm
