#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "coprobe/bench/record.hpp"
#include "coprobe/bench/sweeps.hpp"
#include "coprobe/bench/workload.hpp"

using namespace coprobe;
using namespace coprobe::bench;

TEST(Workload, UniqueKeysAreDistinctAndAvoidSentinels) {
  WorkloadSpec spec;
  spec.n = 8;
  const auto keys = gen_unique(spec);
  EXPECT_EQ(keys.size(), 8u);
  EXPECT_EQ(std::set<std::uint64_t>(keys.begin(), keys.end()).size(), 8u);
  for (unsigned bits : {32u, 64u}) {
    spec.n = 1 << 17;
    spec.key_bits = bits;
    const auto u = gen_unique(spec), a = gen_absent(spec);
    std::set<std::uint64_t> all(u.begin(), u.end());
    ASSERT_EQ(all.size(), spec.n);
    all.insert(a.begin(), a.end());
    ASSERT_EQ(all.size(), 2 * spec.n) << "absent keys must not collide with inserted ones";
    const std::uint64_t top = bits == 32 ? 0xFFFFFFFFull : ~0ull;
    EXPECT_EQ(all.count(top), 0u);
    EXPECT_EQ(all.count(top - 1), 0u);
    if (bits == 32)
      for (auto k : all) ASSERT_LE(k, top);
  }
}

TEST(Workload, DeterministicUnderSeed) {
  WorkloadSpec spec;
  spec.n = 1000;
  spec.r = 10;
  EXPECT_EQ(gen_unique(spec), gen_unique(spec));
  EXPECT_EQ(gen_multiplicity(spec), gen_multiplicity(spec));
  auto other = spec;
  other.seed = 43;
  EXPECT_NE(gen_unique(spec), gen_unique(other));
}

TEST(Workload, MultiplicityHistogram) {
  WorkloadSpec spec;
  spec.n = 100'000;
  spec.r = 16;
  const auto keys = gen_multiplicity(spec);
  ASSERT_EQ(keys.size(), spec.n);
  std::unordered_map<std::uint64_t, std::uint64_t> hist;
  for (auto k : keys) {
    ASSERT_GE(k, 1u);
    ASSERT_LE(k, spec.n / spec.r);
    ++hist[k];
  }
  const double mean = static_cast<double>(spec.n) / static_cast<double>(hist.size());
  EXPECT_NEAR(mean, 16.0, 0.05 * 16.0);
}

TEST(Workload, InvalidSpecs) {
  WorkloadSpec spec;
  spec.n = 10;
  spec.r = 11;
  EXPECT_THROW(gen_multiplicity(spec), invalid_spec);
  spec.r = 0;
  EXPECT_THROW(gen_unique(spec), invalid_spec);
  spec.r = 1;
  spec.key_bits = 16;
  EXPECT_THROW(gen_unique(spec), invalid_spec);
  spec.key_bits = 32;
  spec.target_density = 0.0;
  EXPECT_THROW(validate(spec), invalid_spec);
  spec.target_density = 0.8;
  spec.n = 1ull << 31;  // absent range would wrap into the unique range
  EXPECT_THROW(gen_absent(spec), invalid_spec);
}

TEST(Csv, ZeroRecordsGiveHeaderOnly) {
  std::ostringstream os;
  write_csv(os, {});
  EXPECT_EQ(os.str(), std::string(kCsvHeader) + "\n");
  const auto path = std::filesystem::temp_directory_path() / "coprobe_header_only.csv";
  emit_csv({}, path);
  std::ifstream in(path);
  std::string line, rest;
  std::getline(in, line);
  EXPECT_EQ(line, kCsvHeader);
  EXPECT_FALSE(std::getline(in, rest));
  std::filesystem::remove(path);
}

TEST(Csv, HeaderFollowsRecordFieldOrder) {
  EXPECT_EQ(csv_split(kCsvHeader),
            (std::vector<std::string>{"structure", "operation", "layout", "group_width", "n", "r", "target_density",
                                      "achieved_density", "seconds", "mops", "probe_attempts_mean", "shards"}));
}

TEST(Csv, QuotingFollowsRfc4180) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_split("\"a,b\",c,\"x\"\"y\""), (std::vector<std::string>{"a,b", "c", "x\"y"}));
  EXPECT_EQ(csv_split(",,"), (std::vector<std::string>{"", "", ""}));
  EXPECT_THROW(csv_split("\"open"), std::runtime_error);
}

TEST(Csv, RoundTripParsesBackExactly) {
  std::vector<BenchRecord> recs;
  for (int i = 0; i < 20; ++i) {
    BenchRecord r;
    r.structure = i % 3 == 0 ? "odd,\"name\"" : "single_value";
    r.operation = i % 2 ? "insert" : "retrieve";
    r.layout = "soa";
    r.group_width = 1u << (i % 6);
    r.n = 1000 + i;
    r.r = i + 1;
    r.target_density = 0.1 * (i % 10) + 0.05;
    r.achieved_density = 1.0 / (i + 3);
    r.seconds = 1e-7 * (i + 1) / 3.0;
    r.mops = 12345.678901234567 / (i + 1);
    r.probe_attempts_mean = 1.0 + 1.0 / 7.0 * i;
    r.shards = i % 4 + 1;
    recs.push_back(r);
  }
  std::stringstream ss;
  write_csv(ss, recs);
  EXPECT_EQ(parse_csv(ss), recs);
  std::istringstream bad("nope\n");
  EXPECT_THROW(parse_csv(bad), std::runtime_error);
}

TEST(Csv, UnwritablePathThrows) {
  EXPECT_THROW(emit_csv({}, "/nonexistent-dir/x/y.csv"), std::runtime_error);
}

TEST(Sweeps, SingleSweepCardinalityAndOrder) {
  WorkloadSpec spec;
  spec.n = 1 << 12;
  SweepOptions opts;
  opts.repeats = 2;
  opts.threads = 1;
  const auto recs = run_single_sweep({0.95, 0.5, 0.6, 0.7, 0.8, 0.9}, spec, opts);
  ASSERT_EQ(recs.size(), 12u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].structure, "single_value");
    EXPECT_EQ(recs[i].operation, i % 2 ? "retrieve" : "insert");
    if (i >= 2) EXPECT_GE(recs[i].target_density, recs[i - 2].target_density);
    EXPECT_GT(recs[i].achieved_density, 0.0);
    EXPECT_LE(recs[i].achieved_density, 1.0);
    EXPECT_GE(recs[i].probe_attempts_mean, 1.0);
    if (recs[i].seconds > 0) EXPECT_NEAR(recs[i].mops, spec.n / recs[i].seconds / 1e6, 1e-9 * recs[i].mops);
  }
  EXPECT_DOUBLE_EQ(recs.front().target_density, 0.5);
}

TEST(Sweeps, MultiBucketAndDistributedSweepsVerify) {
  WorkloadSpec spec;
  spec.n = 1 << 12;
  SweepOptions opts;
  opts.repeats = 1;
  opts.threads = 1;
  opts.group_widths = {8, 32};
  const auto multi = run_multi_sweep({16, 1}, spec, opts);
  ASSERT_EQ(multi.size(), 8u);
  EXPECT_EQ(multi[0].r, 1u);
  const auto bucket = run_bucket_sweep({4}, spec, opts);
  ASSERT_EQ(bucket.size(), 8u);  // 2 widths x 2 policies x 2 operations
  std::set<std::string> names;
  for (const auto& r : bucket) names.insert(r.structure);
  EXPECT_EQ(names, (std::set<std::string>{"bucket_list_default", "bucket_list_optimal"}));
  const auto dist = run_distributed_sweep({1, 4}, spec, opts);
  ASSERT_EQ(dist.size(), 8u);
  EXPECT_EQ(dist.back().shards, 4u);
  for (const auto& r : dist) EXPECT_GE(r.probe_attempts_mean, 1.0);
  spec.key_bits = 64;
  EXPECT_EQ(run_single_sweep({0.8}, spec, opts).size(), 4u);
}
