#include "coprobe/bench/sweeps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <unordered_map>

#include "coprobe/distributed.hpp"
#include "coprobe/multi_value_table.hpp"
#include "coprobe/single_value_table.hpp"

namespace coprobe::bench {

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
double timed(Fn&& fn) {
  const auto t0 = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t slots_for(std::uint64_t items, double density) {
  const auto need = static_cast<std::uint64_t>(std::ceil(static_cast<double>(items) / density));
  return std::max<std::uint64_t>(need, kWindowWidth);
}

TableOptions table_options(const SweepOptions& opts, std::uint32_t group_width) {
  TableOptions t;
  t.layout = opts.layout;
  t.group_width = group_width;
  t.scheme = opts.scheme;
  t.threads = opts.threads;
  return t;
}

BenchRecord make_record(std::string structure, std::string operation, const SweepOptions& opts, std::uint32_t gw,
                        const WorkloadSpec& spec, double target, double achieved, double seconds,
                        std::uint64_t attempts, std::uint32_t shards = 1) {
  BenchRecord r;
  r.structure = std::move(structure);
  r.operation = std::move(operation);
  r.layout = std::string(to_string(opts.layout));
  r.group_width = gw;
  r.n = spec.n;
  r.r = spec.r;
  r.target_density = target;
  r.achieved_density = achieved;
  r.seconds = seconds;
  r.mops = seconds > 0.0 ? static_cast<double>(spec.n) / seconds / 1e6 : 0.0;
  r.probe_attempts_mean = static_cast<double>(attempts) / static_cast<double>(spec.n);
  r.shards = shards;
  return r;
}

template <class Key>
std::vector<std::pair<Key, std::uint32_t>> indexed_pairs(const std::vector<std::uint64_t>& keys) {
  std::vector<std::pair<Key, std::uint32_t>> pairs(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) pairs[i] = {static_cast<Key>(keys[i]), static_cast<std::uint32_t>(i)};
  return pairs;
}

template <class Key>
std::vector<Key> narrow(const std::vector<std::uint64_t>& keys) {
  return {keys.begin(), keys.end()};
}

void check_inserted(const std::vector<InsertStatus>& st, const char* what) {
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (st[i] != InsertStatus::inserted)
      throw verification_error(std::string(what) + ": element " + std::to_string(i) + " returned " +
                               std::string(to_string(st[i])));
  }
}

std::unordered_map<std::uint64_t, std::uint64_t> histogram(const std::vector<std::uint64_t>& keys) {
  std::unordered_map<std::uint64_t, std::uint64_t> h;
  for (const auto k : keys) ++h[k];
  return h;
}

// Queries 1..n must return exactly n values in total, and each key's segment
// length must match its multiplicity.
template <class Value>
void check_multi(const MultiRetrieval<Value>& got, const std::unordered_map<std::uint64_t, std::uint64_t>& hist,
                 std::uint64_t n, const char* what) {
  if (got.offsets.back() != n)
    throw verification_error(std::string(what) + ": retrieved " + std::to_string(got.offsets.back()) +
                             " values, expected " + std::to_string(n));
  for (std::uint64_t q = 1; q <= n; ++q) {
    const auto it = hist.find(q);
    const std::uint64_t want = it == hist.end() ? 0 : it->second;
    if (got.count(q - 1) != want)
      throw verification_error(std::string(what) + ": key " + std::to_string(q) + " has " +
                               std::to_string(got.count(q - 1)) + " values, expected " + std::to_string(want));
  }
}

template <class Key>
void single_sweep(const std::vector<double>& densities, const WorkloadSpec& spec, const SweepOptions& opts,
                  std::vector<BenchRecord>& out) {
  const auto keys = gen_unique(spec);
  const auto pairs = indexed_pairs<Key>(keys);
  const auto queries = narrow<Key>(keys);
  const unsigned repeats = std::max(1u, opts.repeats);
  for (const auto gw : opts.group_widths) {
    for (const double rho : densities) {
      const auto plan = choose_capacity(slots_for(spec.n, rho));
      double t_ins = 0, t_ret = 0, achieved = 0;
      ProbeStats ins_stats, ret_stats;
      for (unsigned rep = 0; rep < repeats; ++rep) {
        SingleValueHashTable<Key, std::uint32_t> table(plan, table_options(opts, gw));
        ProbeStats is, rs;
        std::vector<InsertStatus> st;
        t_ins += timed([&] { st = table.insert_bulk(pairs, &is); });
        std::vector<std::optional<std::uint32_t>> got;
        t_ret += timed([&] { got = table.retrieve_bulk(queries, &rs); });
        check_inserted(st, "single-value insert");
        for (std::size_t i = 0; i < got.size(); ++i) {
          if (!got[i] || *got[i] != pairs[i].second)
            throw verification_error("single-value retrieve: wrong result for element " + std::to_string(i));
        }
        if (rep == 0) {
          ins_stats = is;
          ret_stats = rs;
          achieved = table.load_factor();
        }
      }
      out.push_back(make_record("single_value", "insert", opts, gw, spec, rho, achieved, t_ins / repeats,
                                ins_stats.attempts));
      out.push_back(make_record("single_value", "retrieve", opts, gw, spec, rho, achieved, t_ret / repeats,
                                ret_stats.attempts));
    }
  }
}

template <class Key>
void multi_sweep(const std::vector<std::uint64_t>& multiplicities, const WorkloadSpec& base, const SweepOptions& opts,
                 std::vector<BenchRecord>& out) {
  const unsigned repeats = std::max(1u, opts.repeats);
  std::vector<Key> queries(base.n);
  for (std::uint64_t i = 0; i < base.n; ++i) queries[i] = static_cast<Key>(i + 1);
  for (const auto gw : opts.group_widths) {
    for (const auto r : multiplicities) {
      WorkloadSpec spec = base;
      spec.r = r;
      const auto keys = gen_multiplicity(spec);
      const auto pairs = indexed_pairs<Key>(keys);
      const auto hist = histogram(keys);
      const auto plan = choose_capacity(slots_for(spec.n, spec.target_density));
      double t_ins = 0, t_ret = 0, achieved = 0;
      ProbeStats ins_stats, ret_stats;
      for (unsigned rep = 0; rep < repeats; ++rep) {
        MultiValueHashTable<Key, std::uint32_t> table(plan, table_options(opts, gw));
        ProbeStats is, rs;
        std::vector<InsertStatus> st;
        t_ins += timed([&] { st = table.insert_bulk(pairs, &is); });
        MultiRetrieval<std::uint32_t> got;
        t_ret += timed([&] { got = table.retrieve_bulk(queries, &rs); });
        check_inserted(st, "multi-value insert");
        check_multi(got, hist, spec.n, "multi-value retrieve");
        if (rep == 0) {
          ins_stats = is;
          ret_stats = rs;
          achieved = table.storage_density();
        }
      }
      out.push_back(make_record("multi_value", "insert", opts, gw, spec, spec.target_density, achieved,
                                t_ins / repeats, ins_stats.attempts));
      out.push_back(make_record("multi_value", "retrieve", opts, gw, spec, spec.target_density, achieved,
                                t_ret / repeats, ret_stats.attempts));
    }
  }
}

template <class Key>
void bucket_sweep(const std::vector<std::uint64_t>& multiplicities, const WorkloadSpec& base,
                  const SweepOptions& opts, std::vector<BenchRecord>& out) {
  const unsigned repeats = std::max(1u, opts.repeats);
  std::vector<Key> queries(base.n);
  for (std::uint64_t i = 0; i < base.n; ++i) queries[i] = static_cast<Key>(i + 1);
  for (const auto gw : opts.group_widths) {
    for (const auto r : multiplicities) {
      WorkloadSpec spec = base;
      spec.r = r;
      const auto keys = gen_multiplicity(spec);
      const auto pairs = indexed_pairs<Key>(keys);
      const auto hist = histogram(keys);
      for (const auto& named : standard_policies(r)) {
        std::uint64_t pool = 0;
        for (const auto& [k, c] : hist) pool += BucketListHashTable<Key, std::uint32_t>::pool_slots_for(named.policy, c);
        BucketListOptions bo;
        bo.key_store = table_options(opts, gw);
        bo.growth = named.policy;
        bo.pool_capacity = pool;
        double t_ins = 0, t_ret = 0, achieved = 0;
        ProbeStats ins_stats, ret_stats;
        for (unsigned rep = 0; rep < repeats; ++rep) {
          BucketListHashTable<Key, std::uint32_t> table(slots_for(hist.size(), spec.target_density), bo);
          ProbeStats is, rs;
          std::vector<InsertStatus> st;
          t_ins += timed([&] { st = table.insert_bulk(pairs, &is); });
          MultiRetrieval<std::uint32_t> got;
          t_ret += timed([&] { got = table.retrieve_bulk(queries, &rs); });
          check_inserted(st, "bucket-list insert");
          check_multi(got, hist, spec.n, "bucket-list retrieve");
          if (rep == 0) {
            ins_stats = is;
            ret_stats = rs;
            achieved = table.storage_density();
          }
        }
        const std::string name = "bucket_list_" + named.name;
        out.push_back(make_record(name, "insert", opts, gw, spec, spec.target_density, achieved, t_ins / repeats,
                                  ins_stats.attempts));
        out.push_back(make_record(name, "retrieve", opts, gw, spec, spec.target_density, achieved, t_ret / repeats,
                                  ret_stats.attempts));
      }
    }
  }
}

template <class Key>
void distributed_sweep(const std::vector<std::uint32_t>& shard_counts, const WorkloadSpec& spec,
                       const SweepOptions& opts, std::vector<BenchRecord>& out) {
  using Table = MultiValueHashTable<Key, std::uint32_t>;
  const unsigned repeats = std::max(1u, opts.repeats);
  const auto keys = gen_multiplicity(spec);
  const auto pairs = indexed_pairs<Key>(keys);
  const auto hist = histogram(keys);
  std::vector<Key> queries(spec.n);
  for (std::uint64_t i = 0; i < spec.n; ++i) queries[i] = static_cast<Key>(i + 1);
  for (const auto gw : opts.group_widths) {
    for (const auto shards : shard_counts) {
      // Size each shard for the values it will own.
      const ShardRouter router(shards);
      std::vector<std::uint64_t> load(shards, 0);
      for (const auto& [k, c] : hist) load[router.route(k)] += c;
      double t_ins = 0, t_ret = 0, achieved = 0;
      ProbeStats ins_stats, ret_stats;
      for (unsigned rep = 0; rep < repeats; ++rep) {
        DistributedTable<Table> table(shards, DistributionMode::distributed, [&](std::size_t s) {
          auto o = table_options(opts, gw);
          o.threads = 1;
          return std::make_unique<Table>(choose_capacity(slots_for(load[s], spec.target_density)), o);
        });
        std::vector<InsertStatus> st;
        ProbeStats ins_rep, ret_rep;
        t_ins += timed([&] { st = table.insert_bulk(pairs, &ins_rep); });
        MultiRetrieval<std::uint32_t> got;
        t_ret += timed([&] { got = table.retrieve_bulk(queries, &ret_rep); });
        check_inserted(st, "distributed insert");
        check_multi(got, hist, spec.n, "distributed retrieve");
        if (rep == 0) {
          ins_stats = ins_rep;
          ret_stats = ret_rep;
          double used = 0, cap = 0;
          for (std::size_t s = 0; s < table.num_shards(); ++s) {
            used += static_cast<double>(table.shard(s).size());
            cap += static_cast<double>(table.shard(s).capacity());
          }
          achieved = used / cap;
        }
      }
      out.push_back(make_record("distributed_multi_value", "insert", opts, gw, spec, spec.target_density,
                                achieved, t_ins / repeats, ins_stats.attempts, shards));
      out.push_back(make_record("distributed_multi_value", "retrieve", opts, gw, spec, spec.target_density,
                                achieved, t_ret / repeats, ret_stats.attempts, shards));
    }
  }
}

template <class T>
std::vector<T> sorted(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

std::vector<NamedPolicy> standard_policies(std::uint64_t r) {
  return {{"default", GrowthPolicy::default_policy()}, {"optimal", GrowthPolicy::optimal(r)}};
}

std::vector<BenchRecord> run_single_sweep(std::vector<double> densities, const WorkloadSpec& spec,
                                          const SweepOptions& opts) {
  validate(spec);
  for (const double d : densities)
    if (!(d > 0.0 && d < 1.0)) throw invalid_spec("densities must lie in (0, 1)");
  std::vector<BenchRecord> out;
  densities = sorted(std::move(densities));
  if (spec.key_bits == 32) single_sweep<std::uint32_t>(densities, spec, opts, out);
  else single_sweep<std::uint64_t>(densities, spec, opts, out);
  return out;
}

std::vector<BenchRecord> run_multi_sweep(std::vector<std::uint64_t> multiplicities, const WorkloadSpec& spec,
                                         const SweepOptions& opts) {
  validate(spec);
  std::vector<BenchRecord> out;
  multiplicities = sorted(std::move(multiplicities));
  for (const auto r : multiplicities) validate(WorkloadSpec{spec.n, r, spec.key_bits, spec.seed, spec.target_density});
  if (spec.key_bits == 32) multi_sweep<std::uint32_t>(multiplicities, spec, opts, out);
  else multi_sweep<std::uint64_t>(multiplicities, spec, opts, out);
  return out;
}

std::vector<BenchRecord> run_bucket_sweep(std::vector<std::uint64_t> multiplicities, const WorkloadSpec& spec,
                                          const SweepOptions& opts) {
  validate(spec);
  if (opts.layout == LayoutKind::PackedAoS) throw invalid_spec("bucket list key store cannot use the packed layout");
  std::vector<BenchRecord> out;
  multiplicities = sorted(std::move(multiplicities));
  for (const auto r : multiplicities) validate(WorkloadSpec{spec.n, r, spec.key_bits, spec.seed, spec.target_density});
  if (spec.key_bits == 32) bucket_sweep<std::uint32_t>(multiplicities, spec, opts, out);
  else bucket_sweep<std::uint64_t>(multiplicities, spec, opts, out);
  return out;
}

std::vector<BenchRecord> run_distributed_sweep(std::vector<std::uint32_t> shard_counts, const WorkloadSpec& spec,
                                               const SweepOptions& opts) {
  validate(spec);
  std::vector<BenchRecord> out;
  shard_counts = sorted(std::move(shard_counts));
  for (const auto s : shard_counts)
    if (s == 0) throw invalid_spec("shard count must be positive");
  if (spec.key_bits == 32) distributed_sweep<std::uint32_t>(shard_counts, spec, opts, out);
  else distributed_sweep<std::uint64_t>(shard_counts, spec, opts, out);
  return out;
}

}  // namespace coprobe::bench
