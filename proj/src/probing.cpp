#include "coprobe/probing.hpp"

#include <stdexcept>
#include <string>

namespace coprobe {

bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  if (n < 4) return true;
  if (n % 2 == 0 || n % 3 == 0) return false;
  for (std::uint64_t d = 5; d * d <= n; d += 6) {
    if (n % d == 0 || n % (d + 2) == 0) return false;
  }
  return true;
}

CapacityPlan plan_for_prime(std::uint64_t p) {
  if (!is_prime(p)) throw std::invalid_argument("window count " + std::to_string(p) + " is not prime");
  return {p, p * kWindowWidth};
}

CapacityPlan choose_capacity(std::uint64_t min_slots) {
  if (min_slots < kWindowWidth) throw std::invalid_argument("capacity plan needs at least 32 slots");
  std::uint64_t p = (min_slots + kWindowWidth - 1) / kWindowWidth;
  if (p < 2) p = 2;
  while (!is_prime(p)) ++p;
  return {p, p * kWindowWidth};
}

std::uint64_t dh_step(std::uint64_t key, const CapacityPlan& plan) noexcept {
  if (plan.prime <= 2) return kWindowWidth;
  const std::uint64_t m = 1 + mix64(kStepSeed ^ key) % (plan.prime - 1);
  return kWindowWidth * m;
}

void ProbingConfig::validate() const {
  switch (group_width) {
    case 1: case 2: case 4: case 8: case 16: case 32: break;
    default: throw std::invalid_argument("group width must be one of 1, 2, 4, 8, 16, 32");
  }
  if (!is_prime(plan.prime) || plan.capacity != plan.prime * kWindowWidth)
    throw std::invalid_argument("capacity must be 32 * prime");
  if (max_outer_attempts > plan.prime)
    throw std::invalid_argument("outer attempts beyond one double-hashing cycle repeat windows");
}

std::uint64_t ProbingConfig::probe_limit() const noexcept {
  if (scheme == ProbingScheme::COPS) return outer_attempt_limit() * kWindowWidth;
  return plan.capacity;
}

ProbingConfig make_config(std::uint64_t min_slots, std::uint32_t group_width, ProbingScheme scheme) {
  ProbingConfig cfg;
  cfg.scheme = scheme;
  cfg.plan = choose_capacity(min_slots);
  cfg.group_width = group_width;
  cfg.validate();
  return cfg;
}

namespace {

// Plain double hashing over all c slots: an odd step not divisible by p is
// coprime to c = 32 * p.
std::uint64_t plain_dh_step(std::uint64_t key, const ProbingConfig& cfg) noexcept {
  const std::uint64_t c = cfg.plan.capacity;
  std::uint64_t s = (cfg.step_hash(key) % c) | 1u;
  while (s % cfg.plan.prime == 0 && cfg.plan.prime != 2) s = (s + 2) % c;
  return s;
}

}  // namespace

ProbeSequence::ProbeSequence(const ProbingConfig& cfg, std::uint64_t key) noexcept
    : cfg_(&cfg),
      capacity_(cfg.plan.capacity),
      base_(cfg.hash(key) % cfg.plan.capacity),
      step_(0),
      limit_(cfg.probe_limit()) {
  switch (cfg.scheme) {
    case ProbingScheme::COPS: step_ = dh_step(key, cfg.plan); break;
    case ProbingScheme::DH: step_ = plain_dh_step(key, cfg); break;
    case ProbingScheme::LP:
    case ProbingScheme::QP: break;
  }
}

std::uint64_t ProbeSequence::position(std::uint64_t i) const noexcept {
  const std::uint64_t c = capacity_;
  switch (cfg_->scheme) {
    case ProbingScheme::LP: return lp(base_, i, c);
    case ProbingScheme::QP: return qp(base_, i, c);
    case ProbingScheme::DH: {
      const auto prod = static_cast<unsigned __int128>(i % c) * step_;
      return static_cast<std::uint64_t>((base_ + prod) % c);
    }
    case ProbingScheme::COPS: break;
  }
  const std::uint64_t window = i / kWindowWidth;
  const auto start = static_cast<std::uint64_t>((base_ + static_cast<unsigned __int128>(window) * step_) % c);
  return (start + i % kWindowWidth) % c;
}

bool ProbeSequence::next(GroupStep& step) noexcept {
  if (next_attempt_ >= limit_) return false;
  const std::uint32_t g = cfg_->group_width;
  const std::uint64_t remaining = limit_ - next_attempt_;
  step.width = static_cast<std::uint32_t>(remaining < g ? remaining : g);
  step.first_attempt = next_attempt_;
  step.window = cfg_->scheme == ProbingScheme::COPS ? next_attempt_ / kWindowWidth : next_attempt_;
  if (cfg_->scheme == ProbingScheme::COPS) {
    // g divides 32, so a group step never straddles two windows.
    std::uint64_t p = position(next_attempt_);
    for (std::uint32_t lane = 0; lane < step.width; ++lane) {
      step.positions[lane] = p;
      if (++p == capacity_) p = 0;
    }
    if (step.window != last_window_) {
      last_window_ = step.window;
      ++windows_;
    }
  } else {
    for (std::uint32_t lane = 0; lane < step.width; ++lane)
      step.positions[lane] = position(next_attempt_ + lane);
    ++windows_;
  }
  next_attempt_ += step.width;
  ++steps_;
  return true;
}

GroupStep cops_positions(std::uint64_t key, const ProbingConfig& cfg, std::uint64_t global_attempt) {
  if (cfg.scheme != ProbingScheme::COPS) throw std::invalid_argument("cops_positions requires the COPS scheme");
  GroupStep step;
  if (global_attempt >= cfg.probe_limit()) return step;
  ProbeSequence seq(cfg, key);
  const std::uint32_t g = cfg.group_width;
  const std::uint64_t first = global_attempt - global_attempt % g;
  step.first_attempt = first;
  step.window = first / kWindowWidth;
  step.width = g;
  for (std::uint32_t lane = 0; lane < g; ++lane) step.positions[lane] = seq.position(first + lane);
  return step;
}

}  // namespace coprobe
