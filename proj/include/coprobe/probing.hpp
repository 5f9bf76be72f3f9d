#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace coprobe {

/// 64-bit finalizer (xor-shift 33, multiply, xor-shift 33, multiply,
/// xor-shift 33). A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdull;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ull;
  x ^= x >> 33;
  return x;
}

inline constexpr std::uint64_t kStepSeed = 0x9E3779B97F4A7C15ull;

/// Seeded hash: mix64(seed ^ key).
struct HashFn {
  std::uint64_t seed = 0;
  constexpr std::uint64_t operator()(std::uint64_t key) const noexcept { return mix64(seed ^ key); }
};

bool is_prime(std::uint64_t n) noexcept;

/// Capacity c = 32 * p with p prime, giving p distinct 32-slot windows.
struct CapacityPlan {
  std::uint64_t prime = 2;
  std::uint64_t capacity = 64;
  std::uint64_t window_count() const noexcept { return prime; }
};

/// Smallest prime p with 32 * p >= min_slots. Throws std::invalid_argument
/// when min_slots < 32.
CapacityPlan choose_capacity(std::uint64_t min_slots);

/// Plan for an explicit prime; throws when p is not prime.
CapacityPlan plan_for_prime(std::uint64_t p);

constexpr std::uint64_t lp(std::uint64_t hash, std::uint64_t attempt, std::uint64_t c) noexcept {
  return (hash % c + attempt % c) % c;
}

constexpr std::uint64_t qp(std::uint64_t hash, std::uint64_t attempt, std::uint64_t c) noexcept {
  const auto l = static_cast<unsigned __int128>(attempt % c);
  return static_cast<std::uint64_t>((hash % c + l * l) % c);
}

/// Double-hashing step for windowed probing: 32 * m with m in [1, p - 1].
/// Since p is prime, consecutive window starts cycle through all p windows.
std::uint64_t dh_step(std::uint64_t key, const CapacityPlan& plan) noexcept;

enum class ProbingScheme : std::uint8_t { LP, QP, DH, COPS };

constexpr std::string_view to_string(ProbingScheme s) noexcept {
  switch (s) {
    case ProbingScheme::LP: return "lp";
    case ProbingScheme::QP: return "qp";
    case ProbingScheme::DH: return "dh";
    case ProbingScheme::COPS: return "cops";
  }
  return "unknown";
}

inline constexpr std::uint32_t kWindowWidth = 32;

struct ProbingConfig {
  ProbingScheme scheme = ProbingScheme::COPS;
  CapacityPlan plan{};
  std::uint32_t group_width = 8;
  std::uint64_t max_outer_attempts = 0;  // 0 selects one full cycle (p windows)
  HashFn hash{0};
  HashFn step_hash{kStepSeed};

  /// Throws std::invalid_argument on an invalid group width or attempt bound.
  void validate() const;

  /// Total slot positions a key may probe before the sequence is exhausted.
  std::uint64_t probe_limit() const noexcept;

  std::uint64_t outer_attempt_limit() const noexcept {
    return max_outer_attempts == 0 ? plan.prime : max_outer_attempts;
  }
};

ProbingConfig make_config(std::uint64_t min_slots, std::uint32_t group_width = 8,
                          ProbingScheme scheme = ProbingScheme::COPS);

/// The slots examined by one probe group in one step.
struct GroupStep {
  std::array<std::uint64_t, kWindowWidth> positions{};
  std::uint32_t width = 0;
  std::uint64_t first_attempt = 0;  // global attempt index of lane 0
  std::uint64_t window = 0;         // outer window index (COPS) or first_attempt (others)
};

/// Probe-sequence iterator for one key. Each call to next() yields the
/// positions covered by the group for the next step. Groups narrower than
/// the 32-slot window walk it linearly before the outer scheme moves on, so
/// the flattened position order does not depend on the group width.
class ProbeSequence {
 public:
  ProbeSequence(const ProbingConfig& cfg, std::uint64_t key) noexcept;

  /// Returns false once the sequence is exhausted.
  bool next(GroupStep& step) noexcept;

  std::uint64_t attempts() const noexcept { return steps_; }
  std::uint64_t windows_visited() const noexcept { return windows_; }

  /// Position of global attempt `i` (independent of group width).
  std::uint64_t position(std::uint64_t i) const noexcept;

 private:
  const ProbingConfig* cfg_;
  std::uint64_t capacity_;
  std::uint64_t base_;
  std::uint64_t step_;
  std::uint64_t limit_;
  std::uint64_t next_attempt_ = 0;
  std::uint64_t steps_ = 0;
  std::uint64_t windows_ = 0;
  std::uint64_t last_window_ = ~0ull;
};

/// Positions probed by the group step that begins at global attempt `i`.
/// Returns an empty step (width 0) when `i` is past the probe limit.
GroupStep cops_positions(std::uint64_t key, const ProbingConfig& cfg, std::uint64_t global_attempt);

}  // namespace coprobe
