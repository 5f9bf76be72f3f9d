#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "coprobe/layout.hpp"
#include "coprobe/parallel.hpp"
#include "coprobe/probing.hpp"
#include "coprobe/status.hpp"
#include "coprobe/table_options.hpp"

namespace coprobe {

/// Open-addressing hash table in which every key occurs at most once.
///
/// Concurrency: any number of threads may run the same operation kind
/// together, and reads may overlap anything. Mixing writes of different
/// kinds (insert with erase, insert with retrieve of the same key) is only
/// well defined on LayoutKind::PackedAoS. On split layouts a reader may see
/// a freshly claimed key before its value, and insert racing erase on one
/// key can leave the key stored twice.
template <SlotScalar Key, SlotScalar Value>
class SingleValueHashTable {
 public:
  using key_type = Key;
  using value_type = Value;
  using pair_type = std::pair<Key, Value>;
  static constexpr bool multi_value = false;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit SingleValueHashTable(std::uint64_t min_capacity, TableOptions opts = {},
                                Sentinels<Key> sentinels = {})
      : SingleValueHashTable(choose_capacity(min_capacity < kWindowWidth ? kWindowWidth : min_capacity),
                             opts, sentinels) {}

  SingleValueHashTable(const CapacityPlan& plan, TableOptions opts, Sentinels<Key> sentinels = {})
      : cfg_(make_config(plan, opts)),
        slots_(plan.capacity, opts.layout, sentinels),
        threads_(opts.threads) {}

  InsertStatus insert(Key key, Value value) {
    ProbeStats stats;
    return claim<true>(key, value, stats).first;
  }

  InsertStatus insert(Key key, Value value, ProbeStats& stats) {
    return claim<true>(key, value, stats).first;
  }

  /// Finds `key` or claims a slot for it without touching the value cell.
  /// Returns `inserted` with the new slot, or `duplicate_key` with the slot
  /// already holding the key.
  std::pair<InsertStatus, std::size_t> locate_or_claim(Key key, ProbeStats& stats) {
    return claim<false>(key, Value{0}, stats);
  }

  std::optional<Value> retrieve(Key key) const {
    ProbeStats stats;
    return retrieve(key, stats);
  }

  std::optional<Value> retrieve(Key key, ProbeStats& stats) const {
    const auto hit = find(key, stats);
    if (!hit) return std::nullopt;
    return hit->second;
  }

  /// Slot index holding `key`, if present.
  std::optional<std::size_t> find_slot(Key key, ProbeStats& stats) const {
    const auto hit = find(key, stats);
    if (!hit) return std::nullopt;
    return hit->first;
  }

  EraseStatus erase(Key key) {
    const auto& s = slots_.sentinels();
    if (s.is_sentinel(key)) return EraseStatus::not_found;
    ProbeSequence seq(cfg_, key);
    GroupStep step;
    while (seq.next(step)) {
      for (std::uint32_t lane = 0; lane < step.width; ++lane) {
        const std::size_t pos = step.positions[lane];
        const Key cur = slots_.load_key(pos);
        if (cur == s.empty_key) return EraseStatus::not_found;
        if (cur != key) continue;
        if (slots_.try_replace_key(pos, key, s.tombstone_key).won) {
          occupied_.fetch_sub(1, std::memory_order_relaxed);
          tombstones_.fetch_add(1, std::memory_order_relaxed);
          return EraseStatus::erased;
        }
      }
    }
    return EraseStatus::not_found;
  }

  std::vector<InsertStatus> insert_bulk(std::span<const pair_type> pairs, ProbeStats* totals = nullptr) {
    std::vector<InsertStatus> out(pairs.size());
    detail::StatsAccumulator acc;
    parallel_for(pairs.size(), threads_, [&](std::size_t begin, std::size_t end) {
      ProbeStats local;
      for (std::size_t i = begin; i < end; ++i) out[i] = claim<true>(pairs[i].first, pairs[i].second, local).first;
      acc.add(local);
    });
    if (totals) *totals += acc.get();
    return out;
  }

  std::vector<std::optional<Value>> retrieve_bulk(std::span<const Key> keys, ProbeStats* totals = nullptr) const {
    std::vector<std::optional<Value>> out(keys.size());
    detail::StatsAccumulator acc;
    parallel_for(keys.size(), threads_, [&](std::size_t begin, std::size_t end) {
      ProbeStats local;
      for (std::size_t i = begin; i < end; ++i) out[i] = retrieve(keys[i], local);
      acc.add(local);
    });
    if (totals) *totals += acc.get();
    return out;
  }

  /// Invokes `fn(key, value, slot)` for every query that is present.
  template <class Fn>
  void for_each(std::span<const Key> keys, Fn&& fn) const {
    parallel_for(keys.size(), threads_, [&](std::size_t begin, std::size_t end) {
      ProbeStats unused;
      for (std::size_t i = begin; i < end; ++i) {
        if (const auto hit = find(keys[i], unused)) fn(keys[i], hit->second, hit->first);
      }
    });
  }

  /// Invokes `fn(key, value, slot)` once for every occupied slot.
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
  std::size_t tombstones() const noexcept { return tombstones_.load(std::memory_order_relaxed); }
  double load_factor() const noexcept { return static_cast<double>(size()) / static_cast<double>(capacity()); }

  const ProbingConfig& config() const noexcept { return cfg_; }
  const SlotArray<Key, Value>& slots() const noexcept { return slots_; }
  SlotArray<Key, Value>& slots() noexcept { return slots_; }
  unsigned threads() const noexcept { return threads_; }
  void set_threads(unsigned t) noexcept { threads_ = t; }

 private:
  // Probes for `key`, tracking the lowest tombstone passed on the way. The
  // key is placed at that tombstone only once an empty slot (or the end of
  // the sequence) proves the key is not stored further along.
  template <bool StoreValue>
  std::pair<InsertStatus, std::size_t> claim(Key key, Value value, ProbeStats& stats) {
    const auto& s = slots_.sentinels();
    if (s.is_sentinel(key)) return {InsertStatus::invalid_key, npos};

    while (true) {
      ProbeSequence seq(cfg_, key);
      GroupStep step;
      std::optional<std::size_t> tomb;
      std::array<Key, kWindowWidth> keys;
      bool restart = false;

      auto take = [&](std::size_t pos, Key expected) -> std::optional<std::pair<InsertStatus, std::size_t>> {
        const auto r = StoreValue ? slots_.try_claim(pos, expected, key, value)
                                  : slots_.try_claim_key(pos, expected, key);
        if (r.won) {
          occupied_.fetch_add(1, std::memory_order_relaxed);
          if (expected == s.tombstone_key) tombstones_.fetch_sub(1, std::memory_order_relaxed);
          return std::pair{InsertStatus::inserted, pos};
        }
        if (r.observed == key) return std::pair{InsertStatus::duplicate_key, pos};
        return std::nullopt;
      };

      while (!restart && seq.next(step)) {
        for (std::uint32_t lane = 0; lane < step.width; ++lane) keys[lane] = slots_.load_key(step.positions[lane]);
        for (std::uint32_t lane = 0; lane < step.width; ++lane) {
          const std::size_t pos = step.positions[lane];
          const Key cur = keys[lane];
          if (cur == key) {
            stats += {seq.attempts(), seq.windows_visited()};
            return {InsertStatus::duplicate_key, pos};
          }
          if (cur == s.tombstone_key) {
            if (!tomb) tomb = pos;
            continue;
          }
          if (cur != s.empty_key) continue;
          const auto target = tomb.value_or(pos);
          if (auto done = take(target, tomb ? s.tombstone_key : s.empty_key)) {
            stats += {seq.attempts(), seq.windows_visited()};
            return *done;
          }
          // A lost tombstone may have been re-populated with anything; the
          // scan state is stale. A lost empty slot is simply occupied now.
          if (tomb) {
            restart = true;
            break;
          }
        }
      }
      stats += {seq.attempts(), seq.windows_visited()};
      if (restart) continue;
      if (!tomb) return {InsertStatus::table_full, npos};
      if (auto done = take(*tomb, s.tombstone_key)) return *done;
    }
  }

  std::optional<std::pair<std::size_t, Value>> find(Key key, ProbeStats& stats) const {
    const auto& s = slots_.sentinels();
    if (s.is_sentinel(key)) return std::nullopt;
    ProbeSequence seq(cfg_, key);
    GroupStep step;
    std::array<std::pair<Key, Value>, kWindowWidth> cells;
    const bool packed = slots_.layout() == LayoutKind::PackedAoS;
    std::optional<std::pair<std::size_t, Value>> result;
    while (seq.next(step)) {
      for (std::uint32_t lane = 0; lane < step.width; ++lane) {
        const auto pos = step.positions[lane];
        cells[lane] = packed ? slots_.load_pair(pos) : std::pair{slots_.load_key(pos), Value{0}};
      }
      bool stop = false;
      for (std::uint32_t lane = 0; lane < step.width; ++lane) {
        const Key cur = cells[lane].first;
        if (cur == key) {
          const auto pos = step.positions[lane];
          result = std::pair{pos, packed ? cells[lane].second : slots_.load_value(pos)};
          stop = true;
          break;
        }
        if (cur == s.empty_key) {
          stop = true;
          break;
        }
      }
      if (stop) break;
    }
    stats += {seq.attempts(), seq.windows_visited()};
    return result;
  }

  ProbingConfig cfg_;
  SlotArray<Key, Value> slots_;
  unsigned threads_;
  std::atomic<std::size_t> occupied_{0};
  std::atomic<std::size_t> tombstones_{0};
};

}  // namespace coprobe
