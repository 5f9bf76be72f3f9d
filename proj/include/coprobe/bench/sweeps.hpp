#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "coprobe/bench/record.hpp"
#include "coprobe/bench/workload.hpp"
#include "coprobe/bucket_list_table.hpp"
#include "coprobe/layout.hpp"
#include "coprobe/probing.hpp"

namespace coprobe::bench {

/// Raised when a benchmarked table returns a wrong answer.
class verification_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepOptions {
  LayoutKind layout = LayoutKind::SoA;
  std::vector<std::uint32_t> group_widths{8};
  ProbingScheme scheme = ProbingScheme::COPS;
  unsigned threads = 0;
  unsigned repeats = 10;
};

struct NamedPolicy {
  std::string name;
  GrowthPolicy policy;
};

/// Unique-key single-value build + query at each target density.
std::vector<BenchRecord> run_single_sweep(std::vector<double> densities, const WorkloadSpec& spec,
                                          const SweepOptions& opts);

/// Multi-value open addressing at spec.target_density for each multiplicity.
/// Queries the full range 1..n, so exactly n values come back.
std::vector<BenchRecord> run_multi_sweep(std::vector<std::uint64_t> multiplicities, const WorkloadSpec& spec,
                                         const SweepOptions& opts);

/// The two presets compared for bucket lists: default growth and constant
/// buckets sized to the mean multiplicity r.
std::vector<NamedPolicy> standard_policies(std::uint64_t r);

/// Bucket list table for each multiplicity and each standard policy. The
/// target density applies to the key store.
std::vector<BenchRecord> run_bucket_sweep(std::vector<std::uint64_t> multiplicities, const WorkloadSpec& spec,
                                          const SweepOptions& opts);

/// Distributed-mode multi-value table over each shard count.
std::vector<BenchRecord> run_distributed_sweep(std::vector<std::uint32_t> shard_counts, const WorkloadSpec& spec,
                                               const SweepOptions& opts);

}  // namespace coprobe::bench
