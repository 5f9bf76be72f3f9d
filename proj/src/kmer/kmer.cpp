#include "coprobe/kmer/kmer.hpp"

#include <algorithm>
#include <tuple>

#include "coprobe/probing.hpp"

namespace coprobe::kmer {

void KmerParams::validate() const {
  if (k < 1 || k > 32) throw std::invalid_argument("k must be in [1, 32]");
  if (sketch_size < 1) throw std::invalid_argument("sketch size must be >= 1");
  if (window < 1) throw std::invalid_argument("window must be >= 1 base");
}

std::uint64_t encode(std::string_view bases) {
  if (bases.size() > 32) throw std::invalid_argument("at most 32 bases fit in 64 bits");
  std::uint64_t v = 0;
  for (const char c : bases) {
    const int code = base_code(c);
    if (code < 0) throw std::invalid_argument("non-ACGT base");
    v = (v << 2) | static_cast<std::uint64_t>(code);
  }
  return v;
}

std::vector<std::uint64_t> canonical_kmers(std::string_view seq, unsigned k) {
  std::vector<std::uint64_t> out;
  for_each_canonical_kmer(seq, k, [&](std::size_t, std::uint64_t km) { out.push_back(km); });
  return out;
}

std::vector<std::uint64_t> minhash_sketch(std::vector<std::uint64_t> kmers, std::size_t sketch_size) {
  std::sort(kmers.begin(), kmers.end());
  kmers.erase(std::unique(kmers.begin(), kmers.end()), kmers.end());
  const auto by_hash = [](std::uint64_t a, std::uint64_t b) {
    return std::tuple{mix64(a), a} < std::tuple{mix64(b), b};
  };
  const std::size_t keep = std::min(sketch_size, kmers.size());
  std::partial_sort(kmers.begin(), kmers.begin() + static_cast<std::ptrdiff_t>(keep), kmers.end(), by_hash);
  kmers.resize(keep);
  return kmers;
}

std::vector<std::vector<std::uint64_t>> sketch_sequence(std::string_view seq, const KmerParams& params) {
  params.validate();
  std::vector<std::vector<std::uint64_t>> sketches;
  std::vector<std::uint64_t> window;
  std::size_t current = 0;
  const auto flush = [&] {
    if (!window.empty()) sketches.push_back(minhash_sketch(std::move(window), params.sketch_size));
    window.clear();
  };
  for_each_canonical_kmer(seq, params.k, [&](std::size_t pos, std::uint64_t km) {
    const std::size_t w = pos / params.window;
    if (w != current) {
      flush();
      current = w;
    }
    window.push_back(km);
  });
  flush();
  return sketches;
}

std::vector<std::uint64_t> sketch_read(std::string_view read, const KmerParams& params) {
  std::vector<std::uint64_t> out;
  for (auto& s : sketch_sequence(read, params)) out.insert(out.end(), s.begin(), s.end());
  return out;
}

SketchCensus census(const std::vector<ReferenceRecord>& refs, const KmerParams& params) {
  SketchCensus c;
  for (const auto& ref : refs) {
    for (const auto& sketch : sketch_sequence(ref.sequence, params)) {
      ++c.windows;
      c.pairs += sketch.size();
      for (const auto km : sketch) ++c.multiplicity[km];
    }
  }
  return c;
}

Ranking rank_hits(const std::map<std::uint32_t, std::uint64_t>& hits) {
  Ranking out(hits.begin(), hits.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

}  // namespace coprobe::kmer
