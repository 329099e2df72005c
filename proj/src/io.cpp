#include "zoll/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace zoll::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void CsvWriter::header_block(const std::string& config_hash, std::uint64_t seed) {
  buffer += "# tool = ";
  buffer += kToolName;
  buffer += " ";
  buffer += kToolVersion;
  buffer += "\n# config_hash = " + config_hash + "\n";
  buffer += "# seed = " + std::to_string(seed) + "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer += ",";
    buffer += cells[i];
  }
  buffer += "\n";
}

void CsvWriter::raw_line(const std::string& line) {
  buffer += line;
  buffer += "\n";
}

void CsvWriter::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(buffer.data(), std::streamsize(buffer.size()));
}

std::string cell(double v) { return format_double(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(std::int64_t v) { return std::to_string(v); }

}  // namespace zoll::io
