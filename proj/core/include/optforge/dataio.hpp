#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace optforge {

/// Plain-text numeric tables: one row per line, columns separated by commas,
/// decimal floating point. This is the candidate I/O wire format.
using Table = std::vector<std::vector<double>>;

/// Parses a table file. Throws std::runtime_error naming the path and line on
/// malformed input.
Table read_table(const std::filesystem::path& path);

/// Writes with 17 significant digits so doubles round-trip exactly.
void write_table(const std::filesystem::path& path, const Table& rows);

std::string format_double(double v);  // shortest-exact "%.17g" rendering

/// Deterministic, portable uniform doubles in [0, 1). Seeded explicitly;
/// identical sequences on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double next_double();                     // [0, 1)
  double uniform(double lo, double hi);     // [lo, hi)
  double normal();                          // standard normal (Box-Muller)

 private:
  std::uint64_t state_;
};

/// Stable 64-bit content hash (FNV-1a), for config fingerprints and
/// change-detection in tests.
std::uint64_t fnv1a64(const std::string& data);
std::string to_hex(std::uint64_t v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace optforge
