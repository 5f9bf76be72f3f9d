#include <fstream>
#include <istream>

#include "coprobe/kmer/kmer.hpp"

namespace coprobe::kmer {

std::vector<FastaRecord> read_fasta(std::istream& is) {
  std::vector<FastaRecord> records;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '>') {
      records.push_back({line.substr(1), {}});
      continue;
    }
    if (records.empty()) throw std::runtime_error("FASTA sequence data before the first '>' header");
    records.back().sequence += line;
  }
  return records;
}

std::vector<FastaRecord> read_fasta_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_fasta(in);
}

std::vector<ReferenceRecord> to_references(std::vector<FastaRecord> records) {
  std::vector<ReferenceRecord> refs;
  refs.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    refs.push_back({static_cast<std::uint32_t>(i), std::move(records[i].name), std::move(records[i].sequence)});
  return refs;
}

}  // namespace coprobe::kmer
