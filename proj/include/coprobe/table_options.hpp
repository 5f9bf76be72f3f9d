#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "coprobe/layout.hpp"
#include "coprobe/probing.hpp"
#include "coprobe/status.hpp"

namespace coprobe {

struct TableOptions {
  LayoutKind layout = LayoutKind::SoA;
  std::uint32_t group_width = 8;
  ProbingScheme scheme = ProbingScheme::COPS;
  std::uint64_t max_outer_attempts = 0;  // 0 = one full double-hashing cycle
  unsigned threads = 0;                  // workers for bulk operations, 0 = hardware
};

inline ProbingConfig make_config(const CapacityPlan& plan, const TableOptions& opts) {
  ProbingConfig cfg;
  cfg.scheme = opts.scheme;
  cfg.plan = plan;
  cfg.group_width = opts.group_width;
  cfg.max_outer_attempts = opts.max_outer_attempts;
  cfg.validate();
  return cfg;
}

/// Exclusive prefix sum: offsets[0] = 0, offsets[i + 1] = offsets[i] + counts[i].
template <class Count>
std::vector<std::uint64_t> exclusive_prefix_sum(const std::vector<Count>& counts) {
  std::vector<std::uint64_t> offsets(counts.size() + 1);
  offsets[0] = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) offsets[i + 1] = offsets[i] + counts[i];
  return offsets;
}

/// Values for a batch of queries: those of query i occupy
/// [offsets[i], offsets[i + 1]) of `values`.
template <class Value>
struct MultiRetrieval {
  std::vector<std::uint64_t> offsets{0};
  std::vector<Value> values;

  std::size_t queries() const noexcept { return offsets.size() - 1; }
  std::uint64_t count(std::size_t i) const noexcept { return offsets[i + 1] - offsets[i]; }
};

namespace detail {

struct StatsAccumulator {
  std::atomic<std::uint64_t> attempts{0};
  std::atomic<std::uint64_t> windows{0};

  void add(const ProbeStats& s) noexcept {
    attempts.fetch_add(s.attempts, std::memory_order_relaxed);
    windows.fetch_add(s.windows_visited, std::memory_order_relaxed);
  }
  ProbeStats get() const noexcept {
    return {attempts.load(std::memory_order_relaxed), windows.load(std::memory_order_relaxed)};
  }
};

}  // namespace detail
}  // namespace coprobe
