#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace coprobe {

/// Outcome of a single-element insert. Not every table produces every value:
/// only the single-value table reports `duplicate_key`, and only the bucket
/// list table reports `out_of_memory` and `contention_timeout`.
enum class InsertStatus : std::uint8_t {
  inserted,
  duplicate_key,
  table_full,
  invalid_key,
  out_of_memory,
  contention_timeout,
};

enum class EraseStatus : std::uint8_t { erased, not_found };

constexpr std::string_view to_string(InsertStatus s) noexcept {
  switch (s) {
    case InsertStatus::inserted: return "inserted";
    case InsertStatus::duplicate_key: return "duplicate_key";
    case InsertStatus::table_full: return "table_full";
    case InsertStatus::invalid_key: return "invalid_key";
    case InsertStatus::out_of_memory: return "out_of_memory";
    case InsertStatus::contention_timeout: return "contention_timeout";
  }
  return "unknown";
}

/// Per-operation probing cost. `attempts` counts group steps, i.e. how many
/// times the probe group loaded a run of slots.
struct ProbeStats {
  std::uint64_t attempts = 0;
  std::uint64_t windows_visited = 0;

  ProbeStats& operator+=(const ProbeStats& o) noexcept {
    attempts += o.attempts;
    windows_visited += o.windows_visited;
    return *this;
  }
};

/// Thrown when a layout is requested for key/value widths it cannot hold,
/// or when a layout-specific operation is invoked on the wrong layout.
class unsupported_layout : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace coprobe
