// k-mer index demo: build an index from reference FASTA and classify reads.
// classify rebuilds the index from --refs because the tables live in memory.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "coprobe/bench/record.hpp"
#include "coprobe/bucket_list_table.hpp"
#include "coprobe/kmer/kmer.hpp"
#include "coprobe/multi_value_table.hpp"

using namespace coprobe;
using namespace coprobe::kmer;

namespace {

using OaIndex = MultiValueHashTable<std::uint64_t, std::uint32_t>;
using BucketIndex = BucketListHashTable<std::uint64_t, std::uint32_t>;

struct Settings {
  KmerParams params;
  std::string backend = "oa";
  double density = 0.8;
  unsigned threads = 0;
};

std::uint64_t slots_for(std::uint64_t n, double rho) {
  return std::max<std::uint64_t>(64, static_cast<std::uint64_t>(static_cast<double>(n) / rho) + 1);
}

// Sizes the chosen backend from a census of the sketches, builds it, and
// hands it to `use` together with the build statistics.
template <typename Fn>
void with_index(const std::vector<ReferenceRecord>& refs, const Settings& s, Fn&& use) {
  const auto cen = census(refs, s.params);
  TableOptions topts;
  topts.threads = s.threads;
  const auto t0 = std::chrono::steady_clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  if (s.backend == "oa") {
    OaIndex table(slots_for(cen.pairs, s.density), topts);
    const auto stats = build_index(refs, s.params, table, s.threads);
    use(table, stats, cen, seconds());
  } else {
    BucketListOptions bo;
    bo.key_store = topts;
    for (const auto& [km, m] : cen.multiplicity) bo.pool_capacity += BucketIndex::pool_slots_for(bo.growth, m);
    BucketIndex table(slots_for(cen.multiplicity.size(), s.density), bo);
    const auto stats = build_index(refs, s.params, table, s.threads);
    use(table, stats, cen, seconds());
  }
}

void add_common(CLI::App* sub, Settings& s, std::string& refs) {
  sub->add_option("--refs", refs, "reference FASTA")->required()->check(CLI::ExistingFile);
  sub->add_option("--k", s.params.k, "k-mer length (1..32)")->capture_default_str();
  sub->add_option("--window", s.params.window, "bases per sketching window")->capture_default_str();
  sub->add_option("--sketch", s.params.sketch_size, "k-mers kept per window")->capture_default_str();
  sub->add_option("--backend", s.backend, "table backend")->check(CLI::IsMember({"oa", "bucket"}))->capture_default_str();
  sub->add_option("--density", s.density, "target key-store density")->capture_default_str();
  sub->add_option("--threads", s.threads, "worker threads (0 = hardware)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-mer index build and read classification"};
  app.require_subcommand(1);
  Settings s;
  std::string refs_path, reads_path, out;
  std::size_t top = 5;

  auto* build = app.add_subcommand("build", "index references and report statistics");
  add_common(build, s, refs_path);
  build->add_option("--out", out, "statistics CSV (stdout when omitted)");

  auto* classify_cmd = app.add_subcommand("classify", "rank references for each read");
  add_common(classify_cmd, s, refs_path);
  classify_cmd->add_option("--reads", reads_path, "read FASTA")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--top", top, "best targets reported per read")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    s.params.validate();
    const auto records = read_fasta_file(refs_path);
    const auto refs = to_references(records);

    if (*build) {
      with_index(refs, s, [&](auto& table, const BuildStats& st, const SketchCensus& cen, double secs) {
        std::uint64_t max_mult = 0;
        for (const auto& [km, m] : cen.multiplicity) max_mult = std::max(max_mult, m);
        std::ofstream file;
        if (!out.empty()) {
          file.open(out);
          if (!file) throw std::runtime_error("cannot open " + out);
        }
        std::ostream& os = out.empty() ? std::cout : file;
        os << "backend,k,window,sketch,references,windows,sketched_pairs,distinct_kmers,max_multiplicity,"
              "storage_density,seconds\n";
        os << s.backend << ',' << s.params.k << ',' << s.params.window << ',' << s.params.sketch_size << ','
           << st.references << ',' << st.windows << ',' << st.sketched_pairs << ',' << cen.multiplicity.size() << ','
           << max_mult << ',' << table.storage_density() << ',' << secs << '\n';
      });
      return 0;
    }

    const auto reads = read_fasta_file(reads_path);
    with_index(refs, s, [&](auto& table, const BuildStats&, const SketchCensus&, double) {
      std::cout << "read,rank,target_id,target_name,hits\n";
      for (const auto& read : reads) {
        const auto ranking = classify(read.sequence, s.params, table);
        for (std::size_t i = 0; i < std::min(top, ranking.size()); ++i) {
          const auto [target, hits] = ranking[i];
          std::cout << bench::csv_escape(read.name) << ',' << i + 1 << ',' << target << ','
                    << bench::csv_escape(refs[target].name) << ',' << hits << '\n';
        }
      }
    });
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
