#include "coprobe/distributed.hpp"

namespace coprobe {

PartitionPlan multi_split_by(std::span<const std::size_t> destinations, std::size_t num_shards) {
  PartitionPlan plan;
  std::vector<std::uint64_t> counts(num_shards, 0);
  for (const auto d : destinations) {
    if (d >= num_shards) throw std::out_of_range("destination shard out of range");
    ++counts[d];
  }
  plan.offsets = exclusive_prefix_sum(counts);
  plan.permutation.resize(destinations.size());
  std::vector<std::uint64_t> cursor(plan.offsets.begin(), plan.offsets.end() - 1);
  for (std::size_t i = 0; i < destinations.size(); ++i) plan.permutation[cursor[destinations[i]]++] = i;
  return plan;
}

ShardWorker::ShardWorker() : thread_([this] { run(); }) {}

ShardWorker::~ShardWorker() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_one();
  thread_.join();
}

std::future<void> ShardWorker::submit(std::function<void()> task) {
  std::packaged_task<void()> job(std::move(task));
  auto fut = job.get_future();
  {
    std::lock_guard lock(mu_);
    tasks_.push(std::move(job));
  }
  cv_.notify_one();
  return fut;
}

void ShardWorker::run() {
  while (true) {
    std::packaged_task<void()> job;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || !tasks_.empty(); });
      if (tasks_.empty()) return;
      job = std::move(tasks_.front());
      tasks_.pop();
    }
    job();
  }
}

void run_on_all(std::vector<std::unique_ptr<ShardWorker>>& workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::future<void>> pending;
  pending.reserve(workers.size());
  for (std::size_t s = 0; s < workers.size(); ++s) pending.push_back(workers[s]->submit([&fn, s] { fn(s); }));
  for (auto& f : pending) f.wait();
  for (auto& f : pending) f.get();
}

}  // namespace coprobe
