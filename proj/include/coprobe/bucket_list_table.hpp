#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "coprobe/layout.hpp"
#include "coprobe/parallel.hpp"
#include "coprobe/single_value_table.hpp"
#include "coprobe/status.hpp"
#include "coprobe/table_options.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace coprobe {

enum class HandleState : std::uint8_t { uninitialized = 0, blocked = 1, ready = 2, full = 3 };

/// Per-key list descriptor packed into one 64-bit word:
/// bits [0, 2) state, [2, 22) value count, [22, 64) pool offset of the tail
/// bucket. The all-zero word is an uninitialized, empty list.
struct ListHandle {
  static constexpr unsigned kStateBits = 2;
  static constexpr unsigned kCountBits = 20;
  static constexpr unsigned kTailBits = 42;
  static constexpr std::uint64_t kMaxCount = (1ull << kCountBits) - 1;
  static constexpr std::uint64_t kMaxTail = (1ull << kTailBits) - 1;

  HandleState state = HandleState::uninitialized;
  std::uint32_t count = 0;
  std::uint64_t tail = 0;

  constexpr std::uint64_t encode() const noexcept {
    return static_cast<std::uint64_t>(state) | (static_cast<std::uint64_t>(count) << kStateBits) |
           (tail << (kStateBits + kCountBits));
  }

  static constexpr ListHandle decode(std::uint64_t w) noexcept {
    return {static_cast<HandleState>(w & 0x3u),
            static_cast<std::uint32_t>((w >> kStateBits) & kMaxCount),
            w >> (kStateBits + kCountBits)};
  }

  friend constexpr bool operator==(const ListHandle&, const ListHandle&) = default;
};

/// Bucket sizes s_0 and s_i = ceil(lambda * s_{i-1}). lambda is held as a
/// fixed-point rational (micro units) so that e.g. 1.1 * 10 is exactly 11.
class GrowthPolicy {
 public:
  static constexpr std::uint64_t kScale = 1'000'000;

  GrowthPolicy(std::uint64_t s0 = 1, double lambda = 1.1)
      : s0_(s0), lambda_micro_(static_cast<std::uint64_t>(std::llround(lambda * kScale))) {
    if (s0_ == 0) throw std::invalid_argument("initial bucket size must be >= 1");
    if (!(lambda >= 1.0)) throw std::invalid_argument("growth factor must be >= 1");
  }

  static GrowthPolicy default_policy() { return {1, 1.1}; }
  /// Constant buckets sized to the expected number of values per key.
  static GrowthPolicy optimal(std::uint64_t mean_multiplicity) {
    return {std::max<std::uint64_t>(1, mean_multiplicity), 1.0};
  }

  std::uint64_t initial() const noexcept { return s0_; }
  double lambda() const noexcept { return static_cast<double>(lambda_micro_) / kScale; }

  std::uint64_t next(std::uint64_t previous) const noexcept {
    const auto scaled = static_cast<unsigned __int128>(previous) * lambda_micro_;
    return static_cast<std::uint64_t>((scaled + kScale - 1) / kScale);
  }

 private:
  std::uint64_t s0_;
  std::uint64_t lambda_micro_;
};

inline std::uint64_t next_bucket_size(const GrowthPolicy& policy, std::uint64_t previous) {
  return policy.next(previous);
}

/// Pre-allocated value arena with an atomic bump cursor. Slots are never
/// returned.
template <SlotScalar Value>
class BucketPool {
 public:
  explicit BucketPool(std::uint64_t capacity)
      : capacity_(capacity), arena_(std::make_unique<Value[]>(capacity == 0 ? 1 : capacity)) {}

  /// Reserves `slots` consecutive cells; nullopt when the pool cannot fit them.
  std::optional<std::uint64_t> allocate(std::uint64_t slots) noexcept {
    if (slots == 0) return std::nullopt;
    std::uint64_t cur = bump_.load(std::memory_order_relaxed);
    do {
      if (slots > capacity_ - cur) return std::nullopt;
    } while (!bump_.compare_exchange_weak(cur, cur + slots, std::memory_order_relaxed));
    return cur;
  }

  void store(std::uint64_t i, Value v) noexcept { std::atomic_ref<Value>(arena_[i]).store(v, std::memory_order_relaxed); }
  Value load(std::uint64_t i) const noexcept { return std::atomic_ref<Value>(arena_[i]).load(std::memory_order_relaxed); }

  std::uint64_t capacity() const noexcept { return capacity_; }
  std::uint64_t used() const noexcept { return bump_.load(std::memory_order_relaxed); }

 private:
  std::uint64_t capacity_;
  mutable std::unique_ptr<Value[]> arena_;
  std::atomic<std::uint64_t> bump_{0};
};

/// Busy-wait with exponential back-off: 1 spin unit, doubling up to 1024.
class Backoff {
 public:
  static constexpr std::uint32_t kMaxUnits = 1024;

  void pause() noexcept {
    for (std::uint32_t i = 0; i < units_; ++i) relax();
    units_ = std::min(units_ * 2, kMaxUnits);
    std::this_thread::yield();
  }

  std::uint32_t units() const noexcept { return units_; }

 private:
  static void relax() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    _mm_pause();
#endif
  }
  std::uint32_t units_ = 1;
};

struct BucketListOptions {
  TableOptions key_store{};
  GrowthPolicy growth = GrowthPolicy::default_policy();
  std::uint64_t pool_capacity = 0;  // value slots, including bucket headers
  std::uint64_t retry_budget = 1'000'000;
};

/// Multi-value table storing each key once. The key store maps key -> list
/// handle; values live in a chain of buckets carved from a shared pool,
/// linked backwards from the tail. Every bucket but the first starts with a
/// header cell holding the pool offset of its predecessor.
///
/// All operations may run concurrently. Readers see a snapshot taken at the
/// time they load the handle; a value whose slot has been reserved but not
/// yet written is not guaranteed to be visible.
template <SlotScalar Key, SlotScalar Value>
class BucketListHashTable {
 public:
  using key_type = Key;
  using value_type = Value;
  using pair_type = std::pair<Key, Value>;
  static constexpr bool multi_value = true;

  BucketListHashTable(std::uint64_t min_key_capacity, BucketListOptions opts, Sentinels<Key> sentinels = {})
      : keys_(min_key_capacity, checked_key_store(opts.key_store), sentinels),
        pool_(opts.pool_capacity),
        policy_(opts.growth),
        retry_budget_(opts.retry_budget),
        threads_(opts.key_store.threads) {
    if (opts.pool_capacity > ListHandle::kMaxTail) throw std::invalid_argument("pool exceeds handle tail range");
    if (opts.pool_capacity > std::numeric_limits<Value>::max())
      throw std::invalid_argument("pool offsets do not fit the value type");
    build_layout();
  }

  InsertStatus insert(Key key, Value value) {
    ProbeStats stats;
    return insert(key, value, stats);
  }

  InsertStatus insert(Key key, Value value, ProbeStats& stats) {
    const auto [st, slot] = keys_.locate_or_claim(key, stats);
    if (st != InsertStatus::inserted && st != InsertStatus::duplicate_key) return st;
    auto& cells = keys_.slots();
    Backoff backoff;
    std::uint64_t retries = 0;
    while (true) {
      std::uint64_t raw = cells.load_value_acquire(slot);
      const ListHandle h = ListHandle::decode(raw);
      switch (h.state) {
        case HandleState::full:
          return InsertStatus::out_of_memory;
        case HandleState::blocked:
          if (++retries > retry_budget_) return InsertStatus::contention_timeout;
          backoff.pause();
          continue;
        case HandleState::uninitialized: {
          const ListHandle blocked{HandleState::blocked, 0, 0};
          if (!cells.compare_exchange_value(slot, raw, blocked.encode())) continue;
          const auto off = pool_.allocate(sizes_[0]);
          if (!off) {
            cells.store_value_release(slot, ListHandle{HandleState::full, 0, 0}.encode());
            return InsertStatus::out_of_memory;
          }
          pool_.store(*off, value);
          cells.store_value_release(slot, ListHandle{HandleState::ready, 1, *off}.encode());
          values_.fetch_add(1, std::memory_order_relaxed);
          return InsertStatus::inserted;
        }
        case HandleState::ready:
          break;
      }

      const std::size_t b = bucket_of(h.count);
      const std::uint64_t used = h.count - cumulative_before(b);
      if (used < sizes_[b] && h.count < ListHandle::kMaxCount) {
        const ListHandle reserved{HandleState::ready, h.count + 1, h.tail};
        if (!cells.compare_exchange_value(slot, raw, reserved.encode())) continue;
        pool_.store(h.tail + header(b) + used, value);
        values_.fetch_add(1, std::memory_order_relaxed);
        return InsertStatus::inserted;
      }

      // Tail bucket is full: take exclusive access and link a new bucket.
      const ListHandle blocked{HandleState::blocked, h.count, h.tail};
      if (!cells.compare_exchange_value(slot, raw, blocked.encode())) continue;
      const std::size_t nb = b + 1;
      std::optional<std::uint64_t> off;
      if (nb < sizes_.size() && h.count < ListHandle::kMaxCount) off = pool_.allocate(1 + sizes_[nb]);
      if (!off) {
        cells.store_value_release(slot, ListHandle{HandleState::full, h.count, h.tail}.encode());
        return InsertStatus::out_of_memory;
      }
      pool_.store(*off, static_cast<Value>(h.tail));
      pool_.store(*off + 1, value);
      cells.store_value_release(slot, ListHandle{HandleState::ready, h.count + 1, *off}.encode());
      values_.fetch_add(1, std::memory_order_relaxed);
      return InsertStatus::inserted;
    }
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

  /// Current handle of `key`, waiting out a blocked state. nullopt when the
  /// key is absent or the wait exceeds the retry budget.
  std::optional<ListHandle> handle(Key key) const {
    ProbeStats stats;
    return settled_handle(key, stats);
  }

  std::uint64_t count(Key key) const {
    ProbeStats stats;
    return count(key, stats);
  }

  std::uint64_t count(Key key, ProbeStats& stats) const {
    const auto h = settled_handle(key, stats);
    return h ? h->count : 0;
  }

  std::vector<Value> retrieve(Key key) const {
    std::vector<Value> out;
    ProbeStats stats;
    if (const auto h = settled_handle(key, stats)) walk(*h, h->count, [&](Value v) { out.push_back(v); });
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

  MultiRetrieval<Value> retrieve_bulk(std::span<const Key> keys, ProbeStats* totals = nullptr) const {
    MultiRetrieval<Value> out;
    out.offsets = exclusive_prefix_sum(count_bulk(keys, totals));
    out.values.resize(out.offsets.back());
    parallel_for(keys.size(), threads_, [&](std::size_t begin, std::size_t end) {
      ProbeStats unused;
      for (std::size_t i = begin; i < end; ++i) {
        const auto segment = out.offsets[i + 1] - out.offsets[i];
        if (segment == 0) continue;
        const auto h = settled_handle(keys[i], unused);
        if (!h) continue;
        std::uint64_t at = out.offsets[i];
        // Walk only as many values as the counting pass saw, oldest first.
        walk(*h, std::min<std::uint64_t>(segment, h->count), [&](Value v) { out.values[at++] = v; });
      }
    });
    return out;
  }

  /// Invokes `fn(key, value, slot)` for every value of every present query;
  /// `slot` is the key-store slot of the key.
  template <class Fn>
  void for_each(std::span<const Key> keys, Fn&& fn) const {
    parallel_for(keys.size(), threads_, [&](std::size_t begin, std::size_t end) {
      ProbeStats stats;
      for (std::size_t i = begin; i < end; ++i) {
        const Key k = keys[i];
        const auto slot = keys_.find_slot(k, stats);
        if (!slot) continue;
        if (const auto h = settled_handle(k, stats)) walk(*h, h->count, [&](Value v) { fn(k, v, *slot); });
      }
    });
  }

  /// Bucket capacities along the chain of `key`, tail first.
  std::vector<std::uint64_t> chain_bucket_sizes(Key key) const {
    std::vector<std::uint64_t> out;
    ProbeStats stats;
    const auto h = settled_handle(key, stats);
    if (!h || h->count == 0) return out;
    std::size_t b = bucket_of(h->count);
    std::uint64_t off = h->tail;
    while (true) {
      out.push_back(sizes_[b]);
      if (b == 0) break;
      off = static_cast<std::uint64_t>(pool_.load(off));
      --b;
    }
    return out;
  }

  /// Stored information bits over allocated bits: key store cells, list
  /// handles, and the pool slots granted to buckets so far.
  double storage_density() const noexcept {
    const double key_bits = 8.0 * sizeof(Key);
    const double value_bits = 8.0 * sizeof(Value);
    const double stored = static_cast<double>(keys_.size()) * key_bits +
                          static_cast<double>(values_.load(std::memory_order_relaxed)) * value_bits;
    const double allocated = static_cast<double>(keys_.capacity()) * (key_bits + 64.0) +
                             static_cast<double>(pool_.used()) * value_bits;
    return allocated == 0.0 ? 0.0 : stored / allocated;
  }

  /// Pool slots a single key with `values` values consumes under `policy`.
  static std::uint64_t pool_slots_for(const GrowthPolicy& policy, std::uint64_t values) {
    std::uint64_t slots = 0, held = 0, size = policy.initial();
    for (std::size_t b = 0; held < values; ++b) {
      slots += size + (b == 0 ? 0 : 1);
      held += size;
      size = policy.next(size);
    }
    return slots;
  }

  std::size_t key_capacity() const noexcept { return keys_.capacity(); }
  std::size_t key_count() const noexcept { return keys_.size(); }
  std::uint64_t value_count() const noexcept { return values_.load(std::memory_order_relaxed); }
  double load_factor() const noexcept { return keys_.load_factor(); }
  const BucketPool<Value>& pool() const noexcept { return pool_; }
  const GrowthPolicy& growth() const noexcept { return policy_; }
  const SingleValueHashTable<Key, std::uint64_t>& key_store() const noexcept { return keys_; }
  unsigned threads() const noexcept { return threads_; }
  void set_threads(unsigned t) noexcept {
    threads_ = t;
    keys_.set_threads(t);
  }

 private:
  static TableOptions checked_key_store(TableOptions o) {
    if (o.layout == LayoutKind::PackedAoS)
      throw unsupported_layout("bucket list handles are 64-bit; the key store cannot use the packed layout");
    return o;
  }

  static constexpr std::uint64_t header(std::size_t bucket) noexcept { return bucket == 0 ? 0 : 1; }

  // Bucket sizes and cumulative value capacities, far enough to cover the
  // handle's count range or the whole pool, whichever ends first.
  void build_layout() {
    std::uint64_t size = policy_.initial(), held = 0, slots = 0;
    const std::uint64_t reach = ListHandle::kMaxCount;
    for (std::size_t b = 0; held < reach && slots <= pool_.capacity(); ++b) {
      sizes_.push_back(size);
      held += size;
      slots += size + header(b);
      cumulative_.push_back(held);
      size = policy_.next(size);
    }
    if (sizes_.empty()) {
      sizes_.push_back(policy_.initial());
      cumulative_.push_back(policy_.initial());
    }
  }

  // Index of the bucket holding value number `count` (1-based).
  std::size_t bucket_of(std::uint64_t count) const noexcept {
    if (count == 0) return 0;
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), count);
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

  std::uint64_t cumulative_before(std::size_t b) const noexcept { return b == 0 ? 0 : cumulative_[b - 1]; }

  std::optional<ListHandle> settled_handle(Key key, ProbeStats& stats) const {
    const auto slot = keys_.find_slot(key, stats);
    if (!slot) return std::nullopt;
    Backoff backoff;
    for (std::uint64_t retries = 0; retries <= retry_budget_; ++retries) {
      const auto h = ListHandle::decode(keys_.slots().load_value_acquire(*slot));
      if (h.state != HandleState::blocked) return h;
      backoff.pause();
    }
    return std::nullopt;
  }

  // Visits the oldest `limit` values of the list described by `h`, walking
  // from the tail back to the first bucket.
  template <class Visit>
  void walk(const ListHandle& h, std::uint64_t limit, Visit&& visit) const {
    if (h.count == 0 || limit == 0) return;
    std::size_t b = bucket_of(h.count);
    std::uint64_t off = h.tail;
    std::uint64_t used = h.count - cumulative_before(b);
    while (true) {
      const std::uint64_t first_index = cumulative_before(b);  // values before this bucket
      for (std::uint64_t j = 0; j < used; ++j) {
        if (first_index + j < limit) visit(pool_.load(off + header(b) + j));
      }
      if (b == 0) break;
      off = static_cast<std::uint64_t>(pool_.load(off));
      --b;
      used = sizes_[b];
    }
  }

  SingleValueHashTable<Key, std::uint64_t> keys_;
  BucketPool<Value> pool_;
  GrowthPolicy policy_;
  std::uint64_t retry_budget_;
  unsigned threads_;
  std::vector<std::uint64_t> sizes_;
  std::vector<std::uint64_t> cumulative_;
  std::atomic<std::uint64_t> values_{0};
};

}  // namespace coprobe
