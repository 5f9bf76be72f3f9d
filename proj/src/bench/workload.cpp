#include "coprobe/bench/workload.hpp"

#include <random>

#include "coprobe/probing.hpp"

namespace coprobe::bench {

namespace {

// murmur3 32-bit finalizer; bijective on 32-bit words.
constexpr std::uint32_t mix32(std::uint32_t x) noexcept {
  x ^= x >> 16;
  x *= 0x85ebca6bu;
  x ^= x >> 13;
  x *= 0xc2b2ae35u;
  x ^= x >> 16;
  return x;
}

}  // namespace

void validate(const WorkloadSpec& spec) {
  if (spec.n == 0) throw invalid_spec("n must be positive");
  if (spec.r == 0 || spec.r > spec.n) throw invalid_spec("multiplicity r must be in [1, n]");
  if (spec.key_bits != 32 && spec.key_bits != 64) throw invalid_spec("key_bits must be 32 or 64");
  if (spec.key_bits == 32 && spec.n > (1ull << 32) - 2) throw invalid_spec("n exceeds the 32-bit key domain");
  if (!(spec.target_density > 0.0 && spec.target_density <= 1.0))
    throw invalid_spec("target density must be in (0, 1]");
}

std::vector<std::uint64_t> gen_distinct(const WorkloadSpec& spec, std::uint64_t count, std::uint64_t first_index) {
  validate(spec);
  std::vector<std::uint64_t> keys;
  keys.reserve(count);
  if (spec.key_bits == 32) {
    const auto seed = static_cast<std::uint32_t>(mix64(spec.seed));
    for (std::uint64_t i = first_index; keys.size() < count; ++i) {
      const std::uint32_t k = mix32(static_cast<std::uint32_t>(i) ^ seed);
      if (k >= 0xFFFFFFFEu) continue;
      keys.push_back(k);
    }
  } else {
    const std::uint64_t seed = mix64(spec.seed);
    for (std::uint64_t i = first_index; keys.size() < count; ++i) {
      const std::uint64_t k = mix64(i ^ seed);
      if (k >= ~std::uint64_t{1}) continue;
      keys.push_back(k);
    }
  }
  return keys;
}

std::vector<std::uint64_t> gen_unique(const WorkloadSpec& spec) { return gen_distinct(spec, spec.n, 0); }

std::vector<std::uint64_t> gen_absent(const WorkloadSpec& spec) {
  // gen_unique consumes at most n + 2 indices (two sentinels can be skipped).
  // For 32-bit keys both index ranges must fit in the bijection's domain.
  if (spec.key_bits == 32 && 2 * spec.n + 4 > (1ull << 32))
    throw invalid_spec("n too large for a disjoint 32-bit absent-key set");
  return gen_distinct(spec, spec.n, spec.n + 2);
}

std::vector<std::uint64_t> gen_multiplicity(const WorkloadSpec& spec) {
  validate(spec);
  const std::uint64_t range = spec.n / spec.r;
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::uint64_t> dist(1, range);
  std::vector<std::uint64_t> keys(spec.n);
  for (auto& k : keys) k = dist(rng);
  return keys;
}

}  // namespace coprobe::bench
