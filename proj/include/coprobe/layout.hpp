#pragma once

#include <atomic>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>

#include "coprobe/status.hpp"

namespace coprobe {

template <class T>
concept SlotScalar = std::unsigned_integral<T> && (sizeof(T) == 4 || sizeof(T) == 8);

enum class LayoutKind : std::uint8_t { SoA, AoS, PackedAoS };

constexpr std::string_view to_string(LayoutKind k) noexcept {
  switch (k) {
    case LayoutKind::SoA: return "soa";
    case LayoutKind::AoS: return "aos";
    case LayoutKind::PackedAoS: return "packed";
  }
  return "unknown";
}

/// Reserved key values marking never-used and deleted slots.
template <SlotScalar Key>
struct Sentinels {
  Key empty_key = std::numeric_limits<Key>::max();
  Key tombstone_key = std::numeric_limits<Key>::max() - 1;

  constexpr bool valid() const noexcept { return empty_key != tombstone_key; }
  constexpr bool is_sentinel(Key k) const noexcept {
    return k == empty_key || k == tombstone_key;
  }
};

// Packed word: key in the low 32 bits, value in the high 32 bits.
constexpr std::uint64_t pack_pair(std::uint32_t key, std::uint32_t value) noexcept {
  return static_cast<std::uint64_t>(key) | (static_cast<std::uint64_t>(value) << 32);
}

constexpr std::pair<std::uint32_t, std::uint32_t> unpack_pair(std::uint64_t word) noexcept {
  return {static_cast<std::uint32_t>(word), static_cast<std::uint32_t>(word >> 32)};
}

template <SlotScalar Key>
struct ClaimResult {
  bool won;
  Key observed;  // key held by the cell after a lost claim; `desired` on a win
};

/// Fixed-capacity key/value cells in one of three memory layouts.
///
/// Key cells are only ever mutated with atomic compare-and-swap. Value cells
/// of the split layouts (SoA, AoS) are written and read with relaxed atomic
/// accesses, so a reader that races an insert of the same key may observe the
/// key before its value. PackedAoS stores key and value in one 64-bit word and
/// claims both with a single CAS.
template <SlotScalar Key, SlotScalar Value>
class SlotArray {
 public:
  using key_type = Key;
  using value_type = Value;

  static constexpr bool packable = sizeof(Key) == 4 && sizeof(Value) == 4;

  SlotArray(std::size_t capacity, LayoutKind layout, Sentinels<Key> sentinels = {})
      : capacity_(capacity), layout_(layout), sentinels_(sentinels) {
    if (capacity == 0) throw std::invalid_argument("slot array capacity must be > 0");
    if (!sentinels.valid())
      throw std::invalid_argument("empty and tombstone sentinels must differ");

    switch (layout_) {
      case LayoutKind::SoA:
        keys_ = std::make_unique_for_overwrite<Key[]>(capacity);
        values_ = std::make_unique_for_overwrite<Value[]>(capacity);
        for (std::size_t i = 0; i < capacity; ++i) {
          keys_[i] = sentinels_.empty_key;
          values_[i] = Value{0};
        }
        break;
      case LayoutKind::AoS:
        cells_ = std::make_unique_for_overwrite<Cell[]>(capacity);
        for (std::size_t i = 0; i < capacity; ++i) cells_[i] = Cell{sentinels_.empty_key, Value{0}};
        break;
      case LayoutKind::PackedAoS:
        if constexpr (packable) {
          words_ = std::make_unique_for_overwrite<std::uint64_t[]>(capacity);
          const auto empty = pack_pair(sentinels_.empty_key, 0);
          for (std::size_t i = 0; i < capacity; ++i) words_[i] = empty;
        } else {
          throw unsupported_layout("packed layout requires 32-bit keys and values");
        }
        break;
    }
  }

  SlotArray(SlotArray&&) noexcept = default;
  SlotArray& operator=(SlotArray&&) noexcept = default;

  std::size_t capacity() const noexcept { return capacity_; }
  LayoutKind layout() const noexcept { return layout_; }
  const Sentinels<Key>& sentinels() const noexcept { return sentinels_; }

  Key load_key(std::size_t i) const noexcept {
    switch (layout_) {
      case LayoutKind::SoA: return ref(keys_[i]).load(std::memory_order_acquire);
      case LayoutKind::AoS: return ref(cells_[i].key).load(std::memory_order_acquire);
      case LayoutKind::PackedAoS: break;
    }
    return static_cast<Key>(ref(words_[i]).load(std::memory_order_acquire));
  }

  /// Reads `out.size()` consecutive keys starting at `start`, wrapping at the
  /// end of the array. Each cell is read atomically but independently.
  void load_window(std::size_t start, std::span<Key> out) const {
    if (out.empty() || out.size() > 32) throw std::invalid_argument("window width must be in [1, 32]");
    std::size_t i = start % capacity_;
    for (auto& k : out) {
      k = load_key(i);
      if (++i == capacity_) i = 0;
    }
  }

  /// CAS a user key into cell `i` if it currently holds `expected`
  /// (empty or tombstone).
  ClaimResult<Key> try_claim_key(std::size_t i, Key expected, Key desired) noexcept {
    return cas_key(i, expected, desired);
  }

  /// Single-CAS claim of key and value. Only valid on PackedAoS.
  ClaimResult<Key> try_claim_pair_packed(std::size_t i, Key expected, Key key, Value value) {
    if constexpr (packable) {
      if (layout_ != LayoutKind::PackedAoS)
        throw unsupported_layout("pair claim requires the packed layout");
      auto cell = ref(words_[i]);
      std::uint64_t word = cell.load(std::memory_order_acquire);
      const std::uint64_t desired = pack_pair(key, value);
      while (true) {
        const auto current = static_cast<Key>(word);
        if (current != expected) return {false, current};
        if (cell.compare_exchange_weak(word, desired, std::memory_order_acq_rel,
                                       std::memory_order_acquire))
          return {true, key};
      }
    } else {
      (void)i, (void)expected, (void)key, (void)value;
      throw unsupported_layout("pair claim requires the packed layout");
    }
  }

  /// Claims cell `i` for (key, value) using the layout's native protocol:
  /// one CAS on PackedAoS, key CAS plus relaxed value store otherwise.
  ClaimResult<Key> try_claim(std::size_t i, Key expected, Key key, Value value) {
    if (layout_ == LayoutKind::PackedAoS) return try_claim_pair_packed(i, expected, key, value);
    auto r = cas_key(i, expected, key);
    if (r.won) store_value(i, value);
    return r;
  }

  /// Swaps a stored key for another (e.g. user key -> tombstone). On
  /// PackedAoS the value bits are preserved.
  ClaimResult<Key> try_replace_key(std::size_t i, Key expected, Key desired) noexcept {
    return cas_key(i, expected, desired);
  }

  void store_value(std::size_t i, Value v) noexcept {
    switch (layout_) {
      case LayoutKind::SoA: ref(values_[i]).store(v, std::memory_order_relaxed); return;
      case LayoutKind::AoS: ref(cells_[i].value).store(v, std::memory_order_relaxed); return;
      case LayoutKind::PackedAoS: break;
    }
    if constexpr (packable) {
      auto cell = ref(words_[i]);
      std::uint64_t word = cell.load(std::memory_order_relaxed);
      while (!cell.compare_exchange_weak(word, pack_pair(static_cast<std::uint32_t>(word), v),
                                         std::memory_order_release, std::memory_order_relaxed)) {
      }
    }
  }

  Value load_value(std::size_t i) const noexcept {
    switch (layout_) {
      case LayoutKind::SoA: return ref(values_[i]).load(std::memory_order_relaxed);
      case LayoutKind::AoS: return ref(cells_[i].value).load(std::memory_order_relaxed);
      case LayoutKind::PackedAoS: break;
    }
    return static_cast<Value>(ref(words_[i]).load(std::memory_order_acquire) >> 32);
  }

  /// Key and value of cell `i`. Atomic as a pair only on PackedAoS.
  std::pair<Key, Value> load_pair(std::size_t i) const noexcept {
    if (layout_ == LayoutKind::PackedAoS) {
      const auto w = ref(words_[i]).load(std::memory_order_acquire);
      return {static_cast<Key>(w), static_cast<Value>(w >> 32)};
    }
    const Key k = load_key(i);
    return {k, load_value(i)};
  }

  /// Acquire load of a value cell used as a synchronization word.
  Value load_value_acquire(std::size_t i) const {
    return value_ref(i).load(std::memory_order_acquire);
  }

  void store_value_release(std::size_t i, Value v) { value_ref(i).store(v, std::memory_order_release); }

  /// CAS on a value cell. Not available on PackedAoS, where value bits are
  /// part of the key word.
  bool compare_exchange_value(std::size_t i, Value& expected, Value desired) {
    return value_ref(i).compare_exchange_strong(expected, desired, std::memory_order_acq_rel,
                                                std::memory_order_acquire);
  }

 private:
  struct Cell {
    Key key;
    Value value;
  };

  template <class T>
  static std::atomic_ref<T> ref(T& x) noexcept {
    return std::atomic_ref<T>(x);
  }

  std::atomic_ref<Value> value_ref(std::size_t i) const {
    switch (layout_) {
      case LayoutKind::SoA: return ref(values_[i]);
      case LayoutKind::AoS: return ref(cells_[i].value);
      case LayoutKind::PackedAoS: break;
    }
    throw unsupported_layout("value-cell atomics are not available on the packed layout");
  }

  ClaimResult<Key> cas_key(std::size_t i, Key expected, Key desired) noexcept {
    switch (layout_) {
      case LayoutKind::SoA: return cas_plain(ref(keys_[i]), expected, desired);
      case LayoutKind::AoS: return cas_plain(ref(cells_[i].key), expected, desired);
      case LayoutKind::PackedAoS: break;
    }
    if constexpr (packable) {
      auto cell = ref(words_[i]);
      std::uint64_t word = cell.load(std::memory_order_acquire);
      while (true) {
        const auto current = static_cast<Key>(word);
        if (current != expected) return {false, current};
        const std::uint64_t next = (word & 0xFFFFFFFF00000000ull) | static_cast<std::uint32_t>(desired);
        if (cell.compare_exchange_weak(word, next, std::memory_order_acq_rel,
                                       std::memory_order_acquire))
          return {true, desired};
      }
    }
    return {false, expected};
  }

  static ClaimResult<Key> cas_plain(std::atomic_ref<Key> cell, Key expected, Key desired) noexcept {
    Key observed = expected;
    if (cell.compare_exchange_strong(observed, desired, std::memory_order_acq_rel,
                                     std::memory_order_acquire))
      return {true, desired};
    return {false, observed};
  }

  std::size_t capacity_;
  LayoutKind layout_;
  Sentinels<Key> sentinels_;
  // Exactly one storage family is allocated, chosen by layout_. The arrays
  // are mutable because atomic_ref needs a non-const referent even for loads.
  mutable std::unique_ptr<Key[]> keys_;
  mutable std::unique_ptr<Value[]> values_;
  mutable std::unique_ptr<Cell[]> cells_;
  mutable std::unique_ptr<std::uint64_t[]> words_;
};

}  // namespace coprobe
