#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "coprobe/probing.hpp"
#include "coprobe/status.hpp"
#include "coprobe/table_options.hpp"

namespace coprobe {

/// Maps a key to its owning shard using the high 32 bits of mix64(key).
class ShardRouter {
 public:
  explicit ShardRouter(std::size_t num_shards) : num_shards_(num_shards) {
    if (num_shards == 0) throw std::invalid_argument("router needs at least one shard");
  }
  std::size_t num_shards() const noexcept { return num_shards_; }
  std::size_t route(std::uint64_t key) const noexcept { return (mix64(key) >> 32) % num_shards_; }

 private:
  std::size_t num_shards_;
};

/// Stable grouping of input positions by destination shard. Positions for
/// shard s are permutation[offsets[s], offsets[s + 1]), in input order.
struct PartitionPlan {
  std::vector<std::size_t> permutation;
  std::vector<std::uint64_t> offsets;
};

/// Multi-split by explicit destination ids (counting sort).
PartitionPlan multi_split_by(std::span<const std::size_t> destinations, std::size_t num_shards);

template <class Key>
PartitionPlan multi_split(std::span<const Key> keys, const ShardRouter& router) {
  std::vector<std::size_t> dest(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) dest[i] = router.route(static_cast<std::uint64_t>(keys[i]));
  return multi_split_by(dest, router.num_shards());
}

/// All-to-all: inbox[t] is the concatenation over sources s of outbox[s][t].
template <class T>
std::vector<std::vector<T>> exchange(std::vector<std::vector<std::vector<T>>> outboxes) {
  const std::size_t n = outboxes.size();
  std::vector<std::vector<T>> inboxes(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t total = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (outboxes[s].size() != n) throw std::invalid_argument("outbox must have one segment per shard");
      total += outboxes[s][t].size();
    }
    inboxes[t].reserve(total);
    for (std::size_t s = 0; s < n; ++s) {
      auto& seg = outboxes[s][t];
      inboxes[t].insert(inboxes[t].end(), std::make_move_iterator(seg.begin()), std::make_move_iterator(seg.end()));
    }
  }
  return inboxes;
}

/// A single thread draining a task queue; one per shard.
class ShardWorker {
 public:
  ShardWorker();
  ~ShardWorker();
  ShardWorker(const ShardWorker&) = delete;
  ShardWorker& operator=(const ShardWorker&) = delete;

  std::future<void> submit(std::function<void()> task);

 private:
  void run();

  std::mutex mu_;
  std::condition_variable cv_;
  std::queue<std::packaged_task<void()>> tasks_;
  bool stopping_ = false;
  std::thread thread_;
};

enum class DistributionMode : std::uint8_t { distributed, independent };

/// Runs `fn(s)` on every shard's worker and waits for all of them.
void run_on_all(std::vector<std::unique_ptr<ShardWorker>>& workers, const std::function<void(std::size_t)>& fn);

/// A set of per-shard tables behind one bulk interface.
///
/// Distributed mode routes every key to exactly one owner shard: each source
/// slice of the batch is multi-split, segments are exchanged all-to-all, the
/// owners run the bulk operation and results are gathered back into input
/// order. Independent mode scatters inserts round-robin by position in the
/// batch and broadcasts queries to every shard.
///
/// Bulk calls on one instance must not overlap.
template <class Table>
class DistributedTable {
 public:
  using key_type = typename Table::key_type;
  using value_type = typename Table::value_type;
  using pair_type = std::pair<key_type, value_type>;
  static constexpr bool multi_value = Table::multi_value;

  template <class Factory>
  DistributedTable(std::size_t num_shards, DistributionMode mode, Factory&& make_shard)
      : mode_(mode), router_(num_shards) {
    for (std::size_t s = 0; s < num_shards; ++s) {
      shards_.push_back(make_shard(s));
      workers_.push_back(std::make_unique<ShardWorker>());
    }
  }

  std::size_t num_shards() const noexcept { return shards_.size(); }
  DistributionMode mode() const noexcept { return mode_; }
  const ShardRouter& router() const noexcept { return router_; }
  Table& shard(std::size_t s) { return *shards_[s]; }
  const Table& shard(std::size_t s) const { return *shards_[s]; }

  /// `totals`, when given, receives the probe counters summed over shards.
  std::vector<InsertStatus> insert_bulk(std::span<const pair_type> pairs, ProbeStats* totals = nullptr) {
    std::vector<InsertStatus> out(pairs.size());
    std::vector<ProbeStats> stats(shards_.size());
    auto inboxes = mode_ == DistributionMode::distributed ? route_pairs(pairs) : scatter_pairs(pairs);
    run_on_all(workers_, [&](std::size_t t) {
      std::vector<pair_type> batch;
      batch.reserve(inboxes[t].size());
      for (const auto& item : inboxes[t]) batch.push_back(item.second);
      const auto statuses = shards_[t]->insert_bulk(std::span<const pair_type>(batch), &stats[t]);
      for (std::size_t j = 0; j < statuses.size(); ++j) out[inboxes[t][j].first] = statuses[j];
    });
    accumulate(stats, totals);
    return out;
  }

  /// Single-value retrieval: one optional per query. In independent mode
  /// the lowest shard id holding the key wins.
  std::vector<std::optional<value_type>> retrieve_bulk(std::span<const key_type> keys, ProbeStats* totals = nullptr)
    requires(!Table::multi_value)
  {
    std::vector<std::optional<value_type>> out(keys.size());
    std::vector<ProbeStats> stats(shards_.size());
    if (mode_ == DistributionMode::distributed) {
      auto inboxes = route_keys(keys);
      run_on_all(workers_, [&](std::size_t t) {
        const auto batch = payload(inboxes[t]);
        const auto found = shards_[t]->retrieve_bulk(std::span<const key_type>(batch), &stats[t]);
        for (std::size_t j = 0; j < found.size(); ++j) out[inboxes[t][j].first] = found[j];
      });
      accumulate(stats, totals);
      return out;
    }
    std::vector<std::vector<std::optional<value_type>>> per_shard(shards_.size());
    run_on_all(workers_, [&](std::size_t t) { per_shard[t] = shards_[t]->retrieve_bulk(keys, &stats[t]); });
    accumulate(stats, totals);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      for (const auto& found : per_shard) {
        if (found[i]) {
          out[i] = found[i];
          break;
        }
      }
    }
    return out;
  }

  /// Multi-value retrieval. Independent mode concatenates each query's
  /// segments across shards in shard order.
  MultiRetrieval<value_type> retrieve_bulk(std::span<const key_type> keys, ProbeStats* totals = nullptr)
    requires(Table::multi_value)
  {
    std::vector<ProbeStats> stats(shards_.size());
    std::vector<MultiRetrieval<value_type>> parts(shards_.size());
    std::vector<std::vector<std::size_t>> origin(shards_.size());
    if (mode_ == DistributionMode::distributed) {
      auto inboxes = route_keys(keys);
      run_on_all(workers_, [&](std::size_t t) {
        const auto batch = payload(inboxes[t]);
        parts[t] = shards_[t]->retrieve_bulk(std::span<const key_type>(batch), &stats[t]);
        for (const auto& item : inboxes[t]) origin[t].push_back(item.first);
      });
    } else {
      run_on_all(workers_, [&](std::size_t t) {
        parts[t] = shards_[t]->retrieve_bulk(keys, &stats[t]);
        origin[t].resize(keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i) origin[t][i] = i;
      });
    }
    accumulate(stats, totals);
    std::vector<std::uint64_t> counts(keys.size(), 0);
    for (std::size_t t = 0; t < parts.size(); ++t)
      for (std::size_t j = 0; j < origin[t].size(); ++j) counts[origin[t][j]] += parts[t].count(j);
    MultiRetrieval<value_type> out;
    out.offsets = exclusive_prefix_sum(counts);
    out.values.resize(out.offsets.back());
    std::vector<std::uint64_t> cursor(out.offsets.begin(), out.offsets.end() - 1);
    for (std::size_t t = 0; t < parts.size(); ++t) {
      for (std::size_t j = 0; j < origin[t].size(); ++j) {
        const auto i = origin[t][j];
        for (auto v = parts[t].offsets[j]; v < parts[t].offsets[j + 1]; ++v) out.values[cursor[i]++] = parts[t].values[v];
      }
    }
    return out;
  }

  /// Shard ids whose table currently holds `key`.
  std::vector<std::size_t> shards_holding(key_type key) const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < shards_.size(); ++s) {
      bool present;
      if constexpr (Table::multi_value) {
        present = shards_[s]->count(key) > 0;
      } else {
        present = shards_[s]->retrieve(key).has_value();
      }
      if (present) out.push_back(s);
    }
    return out;
  }

 private:
  template <class T>
  using Inbox = std::vector<std::pair<std::size_t, T>>;  // (input position, payload)

  static void accumulate(const std::vector<ProbeStats>& per_shard, ProbeStats* totals) {
    if (!totals) return;
    for (const auto& st : per_shard) *totals += st;
  }

  template <class T>
  static std::vector<T> payload(const Inbox<T>& inbox) {
    std::vector<T> out;
    out.reserve(inbox.size());
    for (const auto& item : inbox) out.push_back(item.second);
    return out;
  }

  // Source shard s owns the s-th contiguous slice of the batch, splits it by
  // owner, and the segments are exchanged all-to-all.
  template <class T, class KeyOf>
  std::vector<Inbox<T>> route(std::span<const T> items, KeyOf key_of) {
    const std::size_t n = shards_.size();
    std::vector<std::vector<Inbox<T>>> outboxes(n, std::vector<Inbox<T>>(n));
    const std::size_t chunk = (items.size() + n - 1) / n;
    run_on_all(workers_, [&](std::size_t s) {
      const std::size_t begin = std::min(items.size(), s * chunk);
      const std::size_t end = std::min(items.size(), begin + chunk);
      std::vector<key_type> keys;
      keys.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) keys.push_back(key_of(items[i]));
      const auto plan = multi_split(std::span<const key_type>(keys), router_);
      for (std::size_t t = 0; t < n; ++t) {
        auto& seg = outboxes[s][t];
        seg.reserve(plan.offsets[t + 1] - plan.offsets[t]);
        for (auto j = plan.offsets[t]; j < plan.offsets[t + 1]; ++j) {
          const std::size_t pos = begin + plan.permutation[j];
          seg.emplace_back(pos, items[pos]);
        }
      }
    });
    return exchange(std::move(outboxes));
  }

  std::vector<Inbox<pair_type>> route_pairs(std::span<const pair_type> pairs) {
    return route(pairs, [](const pair_type& p) { return p.first; });
  }

  std::vector<Inbox<key_type>> route_keys(std::span<const key_type> keys) {
    return route(keys, [](key_type k) { return k; });
  }

  std::vector<Inbox<pair_type>> scatter_pairs(std::span<const pair_type> pairs) const {
    std::vector<Inbox<pair_type>> inboxes(shards_.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) inboxes[i % shards_.size()].emplace_back(i, pairs[i]);
    return inboxes;
  }

  DistributionMode mode_;
  ShardRouter router_;
  std::vector<std::unique_ptr<Table>> shards_;
  std::vector<std::unique_ptr<ShardWorker>> workers_;
};

}  // namespace coprobe
