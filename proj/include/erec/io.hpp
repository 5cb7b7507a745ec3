#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace erec::io {

/** Shortest round-trip decimal form (17 significant digits, C locale). */
std::string format_double(double x);

/**
 * In-memory CSV assembly with fixed formatting: comma separators, '\n' line
 * endings, doubles via format_double. No quoting — field content is expected
 * to stay free of commas and newlines.
 */
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);

  void add_row(std::vector<std::string> fields);
  const std::string& text() const { return text_; }

 private:
  void append_line(const std::vector<std::string>& fields);

  std::size_t columns_ = 0;
  std::string text_;
};

/** Writes the full contents, creating parent directories as needed. */
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace erec::io
