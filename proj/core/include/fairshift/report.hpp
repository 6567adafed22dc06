#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairshift/metrics.hpp"

namespace fairshift {

/// Shortest round-trip decimal form (std::to_chars); parsing the text yields
/// the identical double, which keeps persisted raw values exact and reruns
/// byte-identical.
std::string format_double(double v);
double parse_double(const std::string& s);

/// 64-bit FNV-1a over a canonical text; used to fingerprint configs.
std::uint64_t fnv1a64(const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string to_string() const;
  void save(const std::string& path) const;
  static CsvTable load(const std::string& path);
};

void write_text_file(const std::string& path, const std::string& content);

}  // namespace fairshift
