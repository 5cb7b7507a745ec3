#include "erec/io.hpp"

#include <cstdio>
#include <fstream>

#include "erec/errors.hpp"

namespace erec::io {

std::string format_double(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

Csv::Csv(std::vector<std::string> header) : columns_(header.size()) {
  append_line(header);
}

void Csv::add_row(std::vector<std::string> fields) {
  if (fields.size() != columns_) {
    throw DimensionMismatch("csv row width does not match header");
  }
  append_line(fields);
}

void Csv::append_line(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) text_ += ',';
    text_ += fields[i];
  }
  text_ += '\n';
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open for writing: " + path.string());
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw Error("write failed: " + path.string());
  }
}

}  // namespace erec::io
