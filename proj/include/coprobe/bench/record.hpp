#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace coprobe::bench {

/// One CSV row. Columns appear in declaration order.
struct BenchRecord {
  std::string structure;
  std::string operation;
  std::string layout;
  std::uint32_t group_width = 0;
  std::uint64_t n = 0;
  std::uint64_t r = 1;
  double target_density = 0.0;
  double achieved_density = 0.0;
  double seconds = 0.0;
  double mops = 0.0;
  double probe_attempts_mean = 0.0;
  std::uint32_t shards = 1;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

inline constexpr std::string_view kCsvHeader =
    "structure,operation,layout,group_width,n,r,target_density,achieved_density,seconds,mops,"
    "probe_attempts_mean,shards";

void write_csv(std::ostream& os, const std::vector<BenchRecord>& records);

/// Writes header plus rows to `path`; throws std::runtime_error when the
/// file cannot be opened or written.
void emit_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path);

/// Parses output of write_csv. Throws std::runtime_error on a malformed
/// header or row.
std::vector<BenchRecord> parse_csv(std::istream& is);

/// RFC 4180 field quoting.
std::string csv_escape(std::string_view field);

/// Splits one CSV record (RFC 4180, no embedded newlines).
std::vector<std::string> csv_split(std::string_view line);

}  // namespace coprobe::bench
