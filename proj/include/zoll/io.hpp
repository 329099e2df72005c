#pragma once
// Output helpers: CSV with a comment header block, locale-independent number
// formatting (shortest round-trip via %.17g), config hashing for provenance.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace zoll::io {

inline constexpr const char* kToolName = "zollwave";
inline constexpr const char* kToolVersion = "0.1.0";

std::string format_double(double v);

// FNV-1a over the canonical config text
std::uint64_t fnv1a(const std::string& text);
std::string hash_hex(std::uint64_t h);

struct CsvWriter {
  std::string buffer;

  void header_block(const std::string& config_hash, std::uint64_t seed);
  void row(const std::vector<std::string>& cells);
  void raw_line(const std::string& line);
  void write(const std::filesystem::path& path) const;
};

std::string cell(double v);
std::string cell(int v);
std::string cell(std::int64_t v);

}  // namespace zoll::io
