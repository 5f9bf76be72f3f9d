// Benchmark driver. Every sweep point is verified against an oracle and the
// process exits with status 2 when a table returns a wrong answer.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coprobe/bench/record.hpp"
#include "coprobe/bench/sweeps.hpp"

using namespace coprobe;
using namespace coprobe::bench;

int main(int argc, char** argv) {
  CLI::App app{"Hash table benchmark sweeps with CSV output"};
  app.require_subcommand(1);

  WorkloadSpec spec;
  SweepOptions opts;
  std::vector<double> densities{0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
  std::vector<std::uint64_t> multiplicities;
  std::vector<std::uint32_t> shards{1, 2, 4, 8};
  std::string out, layout = "soa", scheme = "cops";

  const std::map<std::string, LayoutKind> layouts{
      {"soa", LayoutKind::SoA}, {"aos", LayoutKind::AoS}, {"packed", LayoutKind::PackedAoS}};
  const std::map<std::string, ProbingScheme> schemes{
      {"cops", ProbingScheme::COPS}, {"lp", ProbingScheme::LP}, {"qp", ProbingScheme::QP}, {"dh", ProbingScheme::DH}};

  auto* single = app.add_subcommand("single-sweep", "unique keys over a density axis");
  auto* multi = app.add_subcommand("multi-sweep", "multi-value table over a multiplicity axis");
  auto* bucket = app.add_subcommand("bucket-sweep", "bucket list table, default vs optimal growth");
  auto* dist = app.add_subcommand("distributed-sweep", "sharded multi-value table over shard counts");

  for (auto* sub : {single, multi, bucket, dist}) {
    sub->add_option("--n", spec.n, "elements per sweep point")->capture_default_str();
    sub->add_option("--r", spec.r, "mean multiplicity (default axis for multiplicity sweeps)")->capture_default_str();
    sub->add_option("--density", spec.target_density, "target storage density")->capture_default_str();
    sub->add_option("--group-width", opts.group_widths, "probe group widths (one or more of 1..32)")
        ->capture_default_str();
    sub->add_option("--layout", layout, "slot layout")->check(CLI::IsMember({"soa", "aos", "packed"}))->capture_default_str();
    sub->add_option("--scheme", scheme, "probing scheme")->check(CLI::IsMember({"cops", "lp", "qp", "dh"}))->capture_default_str();
    sub->add_option("--threads", opts.threads, "table worker threads (0 = hardware)")->capture_default_str();
    sub->add_option("--key-bits", spec.key_bits, "32 or 64")->check(CLI::IsMember({32, 64}))->capture_default_str();
    sub->add_option("--seed", spec.seed)->capture_default_str();
    sub->add_option("--repeats", opts.repeats, "timed repetitions averaged per point")->capture_default_str();
    sub->add_option("--out", out, "CSV path (stdout when omitted)");
  }
  single->add_option("--densities", densities, "density axis")->capture_default_str();
  for (auto* sub : {multi, bucket}) sub->add_option("--multiplicities", multiplicities, "multiplicity axis");
  dist->add_option("--shards", shards, "shard-count axis")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  opts.layout = layouts.at(layout);
  opts.scheme = schemes.at(scheme);
  if (multiplicities.empty()) multiplicities = {spec.r};

  std::vector<BenchRecord> records;
  try {
    if (*single) records = run_single_sweep(densities, spec, opts);
    else if (*multi) records = run_multi_sweep(multiplicities, spec, opts);
    else if (*bucket) records = run_bucket_sweep(multiplicities, spec, opts);
    else records = run_distributed_sweep(shards, spec, opts);
  } catch (const verification_error& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (out.empty()) write_csv(std::cout, records);
    else emit_csv(records, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
