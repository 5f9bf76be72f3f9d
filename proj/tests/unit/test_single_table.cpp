#include <gtest/gtest.h>

#include <atomic>
#include <map>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "coprobe/single_value_table.hpp"

using namespace coprobe;

namespace {

using Table = SingleValueHashTable<std::uint32_t, std::uint32_t>;
constexpr LayoutKind kAllLayouts[] = {LayoutKind::SoA, LayoutKind::AoS, LayoutKind::PackedAoS};

TableOptions with(LayoutKind layout, unsigned threads = 1) {
  TableOptions o;
  o.layout = layout;
  o.threads = threads;
  return o;
}

// Positions of `key` in the table's own probe order.
std::vector<std::uint64_t> probe_order(const Table& t, std::uint32_t key) {
  std::vector<std::uint64_t> out;
  ProbeSequence seq(t.config(), key);
  GroupStep step;
  while (seq.next(step))
    for (std::uint32_t l = 0; l < step.width; ++l) out.push_back(step.positions[l]);
  return out;
}

std::map<std::uint32_t, std::uint32_t> scan_all(const Table& t) {
  std::map<std::uint32_t, std::uint32_t> m;
  const auto& s = t.slots();
  for (std::size_t i = 0; i < s.capacity(); ++i) {
    const auto [k, v] = s.load_pair(i);
    if (!s.sentinels().is_sentinel(k)) EXPECT_TRUE(m.emplace(k, v).second) << "key stored twice: " << k;
  }
  return m;
}

}  // namespace

TEST(SingleTable, InsertThenRetrieve) {
  for (auto layout : kAllLayouts) {
    Table t(100, with(layout));
    EXPECT_EQ(t.insert(5, 50), InsertStatus::inserted);
    EXPECT_EQ(t.retrieve(5), 50u);
    EXPECT_FALSE(t.retrieve(6).has_value());
  }
}

TEST(SingleTable, DuplicateKeepsOriginalValue) {
  for (auto layout : kAllLayouts) {
    Table t(100, with(layout));
    ASSERT_EQ(t.insert(5, 50), InsertStatus::inserted);
    EXPECT_EQ(t.insert(5, 51), InsertStatus::duplicate_key);
    EXPECT_EQ(t.retrieve(5), 50u);
    EXPECT_EQ(t.size(), 1u);
  }
}

TEST(SingleTable, SentinelsAreRejected) {
  Table t(100);
  const auto& s = t.slots().sentinels();
  EXPECT_EQ(t.insert(s.empty_key, 1), InsertStatus::invalid_key);
  EXPECT_EQ(t.insert(s.tombstone_key, 1), InsertStatus::invalid_key);
  EXPECT_EQ(t.erase(s.empty_key), EraseStatus::not_found);
  EXPECT_FALSE(t.retrieve(s.tombstone_key).has_value());
  EXPECT_EQ(t.size(), 0u);
}

TEST(SingleTable, FillsToNinetySevenPercent) {
  for (auto layout : kAllLayouts) {
    Table t(1000, with(layout));
    ASSERT_EQ(t.capacity(), 1184u);
    const std::size_t m = static_cast<std::size_t>(0.97 * 1184);
    std::mt19937 rng(1);
    std::set<std::uint32_t> keys;
    while (keys.size() < m) keys.insert(rng() % 0xFFFFFF00u);
    for (auto k : keys) ASSERT_EQ(t.insert(k, k ^ 0xABCDu), InsertStatus::inserted);
    for (auto k : keys) ASSERT_EQ(t.retrieve(k), k ^ 0xABCDu);
  }
}

TEST(SingleTable, ReportsTableFullOnlyWhenEverySlotIsTaken) {
  Table t(64);
  ASSERT_EQ(t.capacity(), 64u);
  for (std::uint32_t k = 0; k < 64; ++k) ASSERT_EQ(t.insert(k, k), InsertStatus::inserted);
  EXPECT_EQ(t.insert(1000, 1), InsertStatus::table_full);
  EXPECT_EQ(t.insert(7, 1), InsertStatus::duplicate_key);
  EXPECT_DOUBLE_EQ(t.load_factor(), 1.0);
}

TEST(SingleTable, AbsentKeyOnEmptyTableStopsInFirstWindow) {
  Table t(1000);
  ProbeStats stats;
  EXPECT_FALSE(t.retrieve(42, stats).has_value());
  EXPECT_EQ(stats.attempts, 1u);
  EXPECT_EQ(stats.windows_visited, 1u);
}

TEST(SingleTable, EraseSemantics) {
  for (auto layout : kAllLayouts) {
    Table t(100, with(layout));
    EXPECT_EQ(t.erase(9), EraseStatus::not_found);
    ASSERT_EQ(t.insert(9, 90), InsertStatus::inserted);
    ProbeStats st;
    const auto slot = t.find_slot(9, st);
    EXPECT_EQ(t.erase(9), EraseStatus::erased);
    EXPECT_FALSE(t.retrieve(9).has_value());
    EXPECT_EQ(t.erase(9), EraseStatus::not_found);
    EXPECT_EQ(t.size(), 0u);
    EXPECT_EQ(t.tombstones(), 1u);
    EXPECT_EQ(t.insert(9, 91), InsertStatus::inserted);
    EXPECT_EQ(t.find_slot(9, st), slot);
    EXPECT_EQ(t.retrieve(9), 91u);
    EXPECT_EQ(t.size(), 1u);
    EXPECT_EQ(t.tombstones(), 0u);
  }
}

TEST(SingleTable, TombstoneDoesNotTruncateRetrieval) {
  // k1 and k2 share a probe start, so k2 lands right behind k1. Erasing k1
  // must not hide k2.
  Table t(64);
  const std::uint64_t c = t.capacity();
  std::uint32_t k1 = 1, k2 = 2;
  while (mix64(k2) % c != mix64(k1) % c) ++k2;
  ASSERT_EQ(t.insert(k1, 10), InsertStatus::inserted);
  ASSERT_EQ(t.insert(k2, 20), InsertStatus::inserted);
  ASSERT_EQ(t.erase(k1), EraseStatus::erased);
  EXPECT_EQ(t.retrieve(k2), 20u);
  EXPECT_EQ(t.insert(k2, 21), InsertStatus::duplicate_key) << "tombstone must not hide the stored copy";
  EXPECT_EQ(scan_all(t).size(), 1u);
}

TEST(SingleTable, CollidingKeyReusesTombstone) {
  Table t(64);
  const std::uint64_t c = t.capacity();
  std::uint32_t k1 = 100, k2 = 101;
  while (mix64(k2) % c != mix64(k1) % c) ++k2;
  ProbeStats st;
  ASSERT_EQ(t.insert(k1, 1), InsertStatus::inserted);
  const auto s1 = t.find_slot(k1, st);
  ASSERT_EQ(t.erase(k1), EraseStatus::erased);
  ASSERT_EQ(t.insert(k2, 2), InsertStatus::inserted);
  EXPECT_EQ(t.find_slot(k2, st), s1);
  EXPECT_EQ(t.retrieve(k2), 2u);
  const auto all = scan_all(t);
  EXPECT_EQ(all, (std::map<std::uint32_t, std::uint32_t>{{k2, 2}}));
}

TEST(SingleTable, OracleEquivalenceOverRandomOperations) {
  for (auto layout : kAllLayouts) {
    Table t(256, with(layout));
    std::map<std::uint32_t, std::uint32_t> ref;
    std::mt19937_64 rng(99 + static_cast<int>(layout));
    for (int i = 0; i < 100'000; ++i) {
      const auto key = static_cast<std::uint32_t>(rng() % 200);
      const auto value = static_cast<std::uint32_t>(rng());
      switch (rng() % 3) {
        case 0: {
          const auto st = t.insert(key, value);
          const bool fresh = ref.emplace(key, value).second;
          ASSERT_EQ(st, fresh ? InsertStatus::inserted : InsertStatus::duplicate_key) << "op " << i;
          break;
        }
        case 1: {
          const auto got = t.retrieve(key);
          const auto it = ref.find(key);
          if (it == ref.end()) ASSERT_FALSE(got.has_value()) << "op " << i;
          else ASSERT_EQ(got, it->second) << "op " << i;
          break;
        }
        case 2:
          ASSERT_EQ(t.erase(key), ref.erase(key) ? EraseStatus::erased : EraseStatus::not_found) << "op " << i;
          break;
      }
      ASSERT_EQ(t.size(), ref.size());
    }
    EXPECT_EQ(scan_all(t), ref);
    // Lowest-index placement: each stored key is met before any empty slot.
    const auto& s = t.slots();
    for (const auto& [k, v] : ref) {
      for (auto pos : probe_order(t, k)) {
        const auto cur = s.load_key(pos);
        ASSERT_NE(cur, s.sentinels().empty_key) << "empty slot before key " << k;
        if (cur == k) break;
      }
    }
  }
}

TEST(SingleTable, BulkInsertAndRetrieve) {
  for (auto layout : kAllLayouts) {
    Table t(static_cast<std::uint64_t>((1 << 16) / 0.8), with(layout, 4));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    std::vector<std::uint32_t> keys;
    for (std::uint32_t i = 0; i < (1u << 16); ++i) {
      const auto k = static_cast<std::uint32_t>(mix64(i) >> 33);  // distinct: bijection then truncation
      pairs.emplace_back(k, i);
      keys.push_back(k);
    }
    std::set<std::uint32_t> distinct(keys.begin(), keys.end());
    ASSERT_EQ(distinct.size(), keys.size());
    for (auto st : t.insert_bulk(pairs)) ASSERT_EQ(st, InsertStatus::inserted);
    const auto got = t.retrieve_bulk(keys);
    for (std::size_t i = 0; i < keys.size(); ++i) ASSERT_EQ(got[i], pairs[i].second);
  }
}

TEST(SingleTable, BulkDuplicatesInsideBatch) {
  Table t(4096, with(LayoutKind::PackedAoS, 4));
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::uint32_t copy = 0; copy < 4; ++copy)
    for (std::uint32_t k = 0; k < 500; ++k) pairs.emplace_back(k, k * 10 + copy);
  const auto st = t.insert_bulk(pairs);
  std::map<std::uint32_t, int> inserted;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (st[i] == InsertStatus::inserted) ++inserted[pairs[i].first];
    else ASSERT_EQ(st[i], InsertStatus::duplicate_key);
  }
  for (std::uint32_t k = 0; k < 500; ++k) {
    ASSERT_EQ(inserted[k], 1);
    const auto v = t.retrieve(k);
    ASSERT_TRUE(v.has_value());
    ASSERT_EQ(*v / 10, k);
    ASSERT_LT(*v % 10, 4u);
  }
  EXPECT_TRUE(t.insert_bulk({}).empty());
  EXPECT_TRUE(t.retrieve_bulk({}).empty());
}

TEST(SingleTable, CallbacksAndLoadFactor) {
  Table t(1000, with(LayoutKind::SoA, 3));
  EXPECT_EQ(t.load_factor(), 0.0);
  std::map<std::uint32_t, std::uint32_t> ref;
  for (std::uint32_t k = 1; k <= 300; ++k) {
    ASSERT_EQ(t.insert(k * 7, k), InsertStatus::inserted);
    ref[k * 7] = k;
  }
  EXPECT_DOUBLE_EQ(t.load_factor(), 300.0 / t.capacity());
  std::mutex mu;
  std::map<std::uint32_t, std::uint32_t> seen;
  std::size_t calls = 0;
  t.for_all([&](std::uint32_t k, std::uint32_t v, std::size_t slot) {
    std::lock_guard lock(mu);
    ++calls;
    seen[k] = v;
    EXPECT_EQ(t.slots().load_key(slot), k);
  });
  EXPECT_EQ(calls, 300u);
  EXPECT_EQ(seen, ref);

  std::vector<std::uint32_t> absent{1, 2, 3};
  std::atomic<int> hits{0};
  t.for_each(absent, [&](auto, auto, auto) { ++hits; });
  EXPECT_EQ(hits.load(), 0);
  std::vector<std::uint32_t> present{7, 14, 8};
  t.for_each(present, [&](std::uint32_t k, std::uint32_t v, std::size_t) {
    EXPECT_EQ(v, k / 7);
    ++hits;
  });
  EXPECT_EQ(hits.load(), 2);

  ASSERT_EQ(t.erase(7), EraseStatus::erased);
  EXPECT_DOUBLE_EQ(t.load_factor(), 299.0 / t.capacity());
}

TEST(SingleTable, ConcurrentDisjointInsertsLoseNothing) {
  constexpr unsigned kWorkers = 4;
  constexpr std::uint32_t kPer = 1 << 13;
  for (auto layout : kAllLayouts) {
    Table t(static_cast<std::uint64_t>(kWorkers * kPer / 0.8), with(layout));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < kWorkers; ++w)
      pool.emplace_back([&, w] {
        for (std::uint32_t i = 0; i < kPer; ++i) {
          const std::uint32_t k = w * kPer + i;
          EXPECT_EQ(t.insert(k, ~k), InsertStatus::inserted);
        }
      });
    for (auto& th : pool) th.join();
    EXPECT_EQ(t.size(), kWorkers * kPer);
    for (std::uint32_t k = 0; k < kWorkers * kPer; ++k) ASSERT_EQ(t.retrieve(k), ~k);
  }
}

TEST(SingleTable, PackedSameKeyRaceHasOneWinner) {
  for (int run = 0; run < 50; ++run) {
    Table t(1000, with(LayoutKind::PackedAoS));
    std::atomic<int> winners{0};
    std::vector<std::thread> pool;
    for (std::uint32_t w = 0; w < 4; ++w)
      pool.emplace_back([&, w] {
        if (t.insert(77, 1000 + w) == InsertStatus::inserted) ++winners;
      });
    for (auto& th : pool) th.join();
    ASSERT_EQ(winners.load(), 1);
    const auto v = t.retrieve(77);
    ASSERT_TRUE(v && *v >= 1000 && *v < 1004);
  }
}
