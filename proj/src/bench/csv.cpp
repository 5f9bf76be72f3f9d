#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "coprobe/bench/record.hpp"

namespace coprobe::bench {

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quoted CSV field");
  fields.push_back(std::move(cur));
  return fields;
}

void write_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os << kCsvHeader << '\n';
  // max_digits10 keeps parse_csv(write_csv(x)) == x for doubles.
  os << std::setprecision(17);
  for (const auto& r : records) {
    os << csv_escape(r.structure) << ',' << csv_escape(r.operation) << ',' << csv_escape(r.layout) << ','
       << r.group_width << ',' << r.n << ',' << r.r << ',' << r.target_density << ',' << r.achieved_density << ','
       << r.seconds << ',' << r.mops << ',' << r.probe_attempts_mean << ',' << r.shards << '\n';
  }
}

void emit_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(out, records);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

template <class T>
T parse_number(const std::string& s) {
  if constexpr (std::is_floating_point_v<T>) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("bad number '" + s + "'");
    return v;
  } else {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::runtime_error("bad integer '" + s + "'");
    return v;
  }
}

}  // namespace

std::vector<BenchRecord> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::runtime_error("unexpected CSV header: " + line);
  std::vector<BenchRecord> records;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = csv_split(line);
    if (f.size() != 12) throw std::runtime_error("expected 12 fields, got " + std::to_string(f.size()));
    BenchRecord r;
    r.structure = f[0];
    r.operation = f[1];
    r.layout = f[2];
    r.group_width = parse_number<std::uint32_t>(f[3]);
    r.n = parse_number<std::uint64_t>(f[4]);
    r.r = parse_number<std::uint64_t>(f[5]);
    r.target_density = parse_number<double>(f[6]);
    r.achieved_density = parse_number<double>(f[7]);
    r.seconds = parse_number<double>(f[8]);
    r.mops = parse_number<double>(f[9]);
    r.probe_attempts_mean = parse_number<double>(f[10]);
    r.shards = parse_number<std::uint32_t>(f[11]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace coprobe::bench
