#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace coprobe::bench {

struct WorkloadSpec {
  std::uint64_t n = 1ull << 20;
  std::uint64_t r = 1;          // mean key multiplicity
  unsigned key_bits = 32;       // 32 or 64
  std::uint64_t seed = 42;
  double target_density = 0.8;  // rho
};

class invalid_spec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate(const WorkloadSpec& spec);

/// `count` pairwise-distinct keys drawn from a seeded bijection over the
/// key domain, starting at index `first_index`. Sentinel values (all-ones
/// and all-ones minus one) are skipped. Index ranges that do not overlap
/// yield disjoint key sets.
std::vector<std::uint64_t> gen_distinct(const WorkloadSpec& spec, std::uint64_t count, std::uint64_t first_index = 0);

/// `spec.n` pairwise-distinct keys.
std::vector<std::uint64_t> gen_unique(const WorkloadSpec& spec);

/// n keys disjoint from gen_unique(spec). 32-bit specs need 2n + 4 <= 2^32.
std::vector<std::uint64_t> gen_absent(const WorkloadSpec& spec);

/// n keys drawn uniformly from [1, n / r].
std::vector<std::uint64_t> gen_multiplicity(const WorkloadSpec& spec);

}  // namespace coprobe::bench
