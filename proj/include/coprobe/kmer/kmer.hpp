#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coprobe/parallel.hpp"
#include "coprobe/status.hpp"

namespace coprobe::kmer {

/// Sketching parameters. The defaults are placeholders for a desk-scale
/// demo, not tuned classification settings.
struct KmerParams {
  unsigned k = 16;               // bases per k-mer, 2 bits each
  std::size_t sketch_size = 16;  // smallest hashes kept per window
  std::size_t window = 128;      // bases per non-overlapping window

  void validate() const;
};

struct ReferenceRecord {
  std::uint32_t target_id = 0;
  std::string name;
  std::string sequence;
};

/// 2-bit base code (A=0, C=1, G=2, T=3, case-insensitive); -1 otherwise.
constexpr int base_code(char c) noexcept {
  switch (c) {
    case 'A': case 'a': return 0;
    case 'C': case 'c': return 1;
    case 'G': case 'g': return 2;
    case 'T': case 't': return 3;
    default: return -1;
  }
}

/// Forward 2-bit encoding of an all-ACGT string of length <= 32.
std::uint64_t encode(std::string_view bases);

/// Calls `fn(position, kmer)` for every k-mer of `seq` that contains only
/// ACGT, where kmer = min(forward, reverse complement) and position is the
/// k-mer's start offset in `seq`.
template <class Fn>
void for_each_canonical_kmer(std::string_view seq, unsigned k, Fn&& fn) {
  if (k == 0 || k > 32 || seq.size() < k) return;
  const std::uint64_t mask = k == 32 ? ~0ull : (1ull << (2 * k)) - 1;
  const unsigned shift = 2 * (k - 1);
  std::uint64_t fwd = 0, rev = 0;
  unsigned valid = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const int c = base_code(seq[i]);
    if (c < 0) {
      valid = 0;
      fwd = rev = 0;
      continue;
    }
    fwd = ((fwd << 2) | static_cast<std::uint64_t>(c)) & mask;
    rev = (rev >> 2) | (static_cast<std::uint64_t>(3 - c) << shift);
    if (++valid >= k) fn(i + 1 - k, std::min(fwd, rev));
  }
}

std::vector<std::uint64_t> canonical_kmers(std::string_view seq, unsigned k);

/// The `sketch_size` distinct k-mers with the smallest mix64 values, ties
/// broken by k-mer value, in ascending (hash, k-mer) order.
std::vector<std::uint64_t> minhash_sketch(std::vector<std::uint64_t> kmers, std::size_t sketch_size);

/// Sketches of every window of `seq`. A k-mer belongs to the window that
/// contains its start position; windows without k-mers are omitted.
std::vector<std::vector<std::uint64_t>> sketch_sequence(std::string_view seq, const KmerParams& params);

/// Sketch of a read: the union of its window sketches, with multiplicity.
std::vector<std::uint64_t> sketch_read(std::string_view read, const KmerParams& params);

/// Raised when the index cannot hold a reference's sketch.
class index_error : public std::runtime_error {
 public:
  index_error(std::uint32_t target, InsertStatus status)
      : std::runtime_error("reference " + std::to_string(target) + " failed to index: " +
                           std::string(to_string(status))),
        target_id(target),
        status(status) {}
  std::uint32_t target_id;
  InsertStatus status;
};

struct BuildStats {
  std::size_t references = 0;
  std::size_t windows = 0;
  std::size_t sketched_pairs = 0;
};

/// Per-k-mer multiplicity of the full sketched corpus, used to size tables.
struct SketchCensus {
  std::size_t windows = 0;
  std::size_t pairs = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> multiplicity;
};

SketchCensus census(const std::vector<ReferenceRecord>& refs, const KmerParams& params);

/// Streams every sketched (k-mer, target_id) pair of `refs` into `table`
/// with per-element inserts, processing references on `threads` workers.
/// Throws index_error naming the first failing reference.
template <class Table>
BuildStats build_index(const std::vector<ReferenceRecord>& refs, const KmerParams& params, Table& table,
                       unsigned threads = 0) {
  params.validate();
  std::vector<BuildStats> per_ref(refs.size());
  std::vector<std::pair<std::size_t, InsertStatus>> failures(refs.size(), {refs.size(), InsertStatus::inserted});
  parallel_for(refs.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& ref = refs[i];
      for (const auto& sketch : sketch_sequence(ref.sequence, params)) {
        ++per_ref[i].windows;
        for (const auto km : sketch) {
          const auto st = table.insert(static_cast<typename Table::key_type>(km),
                                       static_cast<typename Table::value_type>(ref.target_id));
          if (st != InsertStatus::inserted) {
            failures[i] = {i, st};
            return;
          }
          ++per_ref[i].sketched_pairs;
        }
      }
    }
  });
  BuildStats total;
  total.references = refs.size();
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (failures[i].first != refs.size()) throw index_error(refs[i].target_id, failures[i].second);
    total.windows += per_ref[i].windows;
    total.sketched_pairs += per_ref[i].sketched_pairs;
  }
  return total;
}

using Ranking = std::vector<std::pair<std::uint32_t, std::uint64_t>>;  // (target_id, hits)

/// Orders hit counts by descending hits, then ascending target id.
Ranking rank_hits(const std::map<std::uint32_t, std::uint64_t>& hits);

/// Sketches `read`, looks up each k-mer, and ranks targets by hit count.
template <class Table>
Ranking classify(std::string_view read, const KmerParams& params, const Table& table) {
  std::map<std::uint32_t, std::uint64_t> hits;
  for (const auto km : sketch_read(read, params)) {
    for (const auto target : table.retrieve(static_cast<typename Table::key_type>(km)))
      ++hits[static_cast<std::uint32_t>(target)];
  }
  return rank_hits(hits);
}

struct FastaRecord {
  std::string name;
  std::string sequence;
};

/// Minimal FASTA: '>' starts a record whose name is the rest of the line;
/// following lines are concatenated. Blank lines are ignored.
std::vector<FastaRecord> read_fasta(std::istream& is);
std::vector<FastaRecord> read_fasta_file(const std::string& path);

/// Assigns target ids 0, 1, ... in file order.
std::vector<ReferenceRecord> to_references(std::vector<FastaRecord> records);

}  // namespace coprobe::kmer
