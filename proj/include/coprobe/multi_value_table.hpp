#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "coprobe/layout.hpp"
#include "coprobe/parallel.hpp"
#include "coprobe/probing.hpp"
#include "coprobe/status.hpp"
#include "coprobe/table_options.hpp"

namespace coprobe {

/// Open-addressing table where a key may occupy several slots, one per
/// value. Copies of a key land on successive free slots of its probe
/// sequence, so lookups scan until the first empty slot.
///
/// There is no erase: a tombstone inside a chain of copies would need its
/// own deletion semantics, which this table does not define.
template <SlotScalar Key, SlotScalar Value>
class MultiValueHashTable {
 public:
  using key_type = Key;
  using value_type = Value;
  using pair_type = std::pair<Key, Value>;
  static constexpr bool multi_value = true;

  explicit MultiValueHashTable(std::uint64_t min_capacity, TableOptions opts = {},
                               Sentinels<Key> sentinels = {})
      : MultiValueHashTable(choose_capacity(min_capacity < kWindowWidth ? kWindowWidth : min_capacity), opts,
                            sentinels) {}

  MultiValueHashTable(const CapacityPlan& plan, TableOptions opts, Sentinels<Key> sentinels = {})
      : cfg_(make_config(plan, opts)), slots_(plan.capacity, opts.layout, sentinels), threads_(opts.threads) {}

  InsertStatus insert(Key key, Value value) {
    ProbeStats stats;
    return insert(key, value, stats);
  }

  InsertStatus insert(Key key, Value value, ProbeStats& stats) {
    const auto& s = slots_.sentinels();
    if (s.is_sentinel(key)) return InsertStatus::invalid_key;
    ProbeSequence seq(cfg_, key);
    GroupStep step;
    std::array<Key, kWindowWidth> keys;
    while (seq.next(step)) {
      for (std::uint32_t lane = 0; lane < step.width; ++lane) keys[lane] = slots_.load_key(step.positions[lane]);
      for (std::uint32_t lane = 0; lane < step.width; ++lane) {
        const Key cur = keys[lane];
        if (cur != s.empty_key && cur != s.tombstone_key) continue;
        // On a lost CAS the slot now holds some key; move to the next candidate.
        if (slots_.try_claim(step.positions[lane], cur, key, value).won) {
          occupied_.fetch_add(1, std::memory_order_relaxed);
          stats += {seq.attempts(), seq.windows_visited()};
          return InsertStatus::inserted;
        }
      }
    }
    stats += {seq.attempts(), seq.windows_visited()};
    return InsertStatus::table_full;
  }

  std::vector<InsertStatus> insert_bulk(std::span<const pair_type> pairs, ProbeStats* totals = nullptr) {
    std::vector<InsertStatus> out(pairs.size());
    detail::StatsAccumulator acc;
    parallel_for(pairs.size(), threads_, [&](std::size_t begin, std::size_t end) {
      ProbeStats local;
      for (std::size_t i = begin; i < end; ++i) out[i] = insert(pairs[i].first, pairs[i].second, local);
      acc.add(local);
    });
    if (totals) *totals += acc.get();
    return out;
  }

  std::uint64_t count(Key key) const {
    ProbeStats stats;
    return count(key, stats);
  }

  std::uint64_t count(Key key, ProbeStats& stats) const {
    std::uint64_t n = 0;
    scan(key, stats, [&](Value, std::size_t) { ++n; });
    return n;
  }

  std::vector<Value> retrieve(Key key) const {
    std::vector<Value> out;
    ProbeStats stats;
    scan(key, stats, [&](Value v, std::size_t) { out.push_back(v); });
    return out;
  }

  std::vector<std::uint64_t> count_bulk(std::span<const Key> keys, ProbeStats* totals = nullptr) const {
    std::vector<std::uint64_t> counts(keys.size());
    detail::StatsAccumulator acc;
    parallel_for(keys.size(), threads_, [&](std::size_t begin, std::size_t end) {
      ProbeStats local;
      for (std::size_t i = begin; i < end; ++i) counts[i] = count(keys[i], local);
      acc.add(local);
    });
    if (totals) *totals += acc.get();
    return counts;
  }

  /// Counting pass, prefix sum, then a second pass writing each query's
  /// values into its segment. Values inserted between the passes are not
  /// reported (a segment is never overrun).
  MultiRetrieval<Value> retrieve_bulk(std::span<const Key> keys, ProbeStats* totals = nullptr) const {
    MultiRetrieval<Value> out;
    out.offsets = exclusive_prefix_sum(count_bulk(keys, totals));
    out.values.resize(out.offsets.back());
    detail::StatsAccumulator acc;
    parallel_for(keys.size(), threads_, [&](std::size_t begin, std::size_t end) {
      ProbeStats local;
      for (std::size_t i = begin; i < end; ++i) {
        std::uint64_t at = out.offsets[i];
        const std::uint64_t stop = out.offsets[i + 1];
        scan(keys[i], local, [&](Value v, std::size_t) {
          if (at < stop) out.values[at++] = v;
        });
      }
      acc.add(local);
    });
    if (totals) *totals += acc.get();
    return out;
  }

  /// Invokes `fn(key, value, slot)` once per matching slot of every query.
  template <class Fn>
  void for_each(std::span<const Key> keys, Fn&& fn) const {
    parallel_for(keys.size(), threads_, [&](std::size_t begin, std::size_t end) {
      ProbeStats unused;
      for (std::size_t i = begin; i < end; ++i) {
        const Key k = keys[i];
        scan(k, unused, [&](Value v, std::size_t slot) { fn(k, v, slot); });
      }
    });
  }

  template <class Fn>
  void for_all(Fn&& fn) const {
    const auto& s = slots_.sentinels();
    parallel_for(slots_.capacity(), threads_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto [k, v] = slots_.load_pair(i);
        if (!s.is_sentinel(k)) fn(k, v, i);
      }
    });
  }

  std::size_t capacity() const noexcept { return slots_.capacity(); }
  std::size_t size() const noexcept { return occupied_.load(std::memory_order_relaxed); }
  double load_factor() const noexcept { return static_cast<double>(size()) / static_cast<double>(capacity()); }
  /// Equals the load factor: every value costs one full key/value slot.
  double storage_density() const noexcept { return load_factor(); }

  const ProbingConfig& config() const noexcept { return cfg_; }
  const SlotArray<Key, Value>& slots() const noexcept { return slots_; }
  unsigned threads() const noexcept { return threads_; }
  void set_threads(unsigned t) noexcept { threads_ = t; }

 private:
  // Visits every slot holding `key` along its sequence, stopping at the
  // first empty slot. Tombstones do not end the scan.
  template <class Visit>
  void scan(Key key, ProbeStats& stats, Visit&& visit) const {
    const auto& s = slots_.sentinels();
    if (s.is_sentinel(key)) return;
    ProbeSequence seq(cfg_, key);
    GroupStep step;
    const bool packed = slots_.layout() == LayoutKind::PackedAoS;
    std::array<std::pair<Key, Value>, kWindowWidth> cells;
    while (seq.next(step)) {
      for (std::uint32_t lane = 0; lane < step.width; ++lane) {
        const auto pos = step.positions[lane];
        cells[lane] = packed ? slots_.load_pair(pos) : std::pair{slots_.load_key(pos), Value{0}};
      }
      for (std::uint32_t lane = 0; lane < step.width; ++lane) {
        const Key cur = cells[lane].first;
        if (cur == s.empty_key) {
          stats += {seq.attempts(), seq.windows_visited()};
          return;
        }
        if (cur == key) {
          const auto pos = step.positions[lane];
          visit(packed ? cells[lane].second : slots_.load_value(pos), pos);
        }
      }
    }
    stats += {seq.attempts(), seq.windows_visited()};
  }

  ProbingConfig cfg_;
  SlotArray<Key, Value> slots_;
  unsigned threads_;
  std::atomic<std::size_t> occupied_{0};
};

}  // namespace coprobe
