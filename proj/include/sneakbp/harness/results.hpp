#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sneakbp::harness {

/// One (experiment, sigma, detector) point. Rates are derived from the
/// integer counters, so a CSV reader can always recompute them.
struct ResultRow {
  std::string experiment;
  double sigma = 0.0;
  std::string detector;
  long trials = 0;
  long bit_errors = 0;
  long total_bits = 0;
  double ber = 0.0;
  long block_errors = 0;
  double bler = 0.0;
  std::optional<double> sfdr_mean;  // empty when no array had a failed selector or SFDR does not apply
  long sfdr_n = 0;                  // arrays contributing to sfdr_mean
  std::uint64_t seed = 0;
  double sfdr_std_error = 0.0;      // not part of the CSV

  /// Binomial Wald standard errors.
  double ber_std_error() const { return wald(ber, total_bits); }
  double bler_std_error() const { return wald(bler, trials); }

  static double wald(double p, long n) { return n <= 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }
};

inline constexpr const char* kCsvHeader =
    "experiment,sigma,detector,trials,bit_errors,total_bits,ber,block_errors,bler,sfdr_mean,sfdr_n,seed";

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline std::string format_csv(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("no result rows to write");
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    if (r.experiment.find(',') != std::string::npos || r.detector.find(',') != std::string::npos)
      throw std::invalid_argument("CSV text fields may not contain commas");
    os << r.experiment << ',' << detail::format_double(r.sigma) << ',' << r.detector << ',' << r.trials << ','
       << r.bit_errors << ',' << r.total_bits << ',' << detail::format_double(r.ber) << ',' << r.block_errors << ','
       << detail::format_double(r.bler) << ',' << (r.sfdr_mean ? detail::format_double(*r.sfdr_mean) : "") << ','
       << r.sfdr_n << ',' << r.seed << '\n';
  }
  return os.str();
}

inline std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::runtime_error("CSV header mismatch");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 12) throw std::runtime_error("CSV row has " + std::to_string(f.size()) + " fields: " + line);
    ResultRow r;
    r.experiment = f[0];
    r.sigma = std::stod(f[1]);
    r.detector = f[2];
    r.trials = std::stol(f[3]);
    r.bit_errors = std::stol(f[4]);
    r.total_bits = std::stol(f[5]);
    r.ber = std::stod(f[6]);
    r.block_errors = std::stol(f[7]);
    r.bler = std::stod(f[8]);
    if (!f[9].empty()) r.sfdr_mean = std::stod(f[9]);
    r.sfdr_n = std::stol(f[10]);
    r.seed = std::stoull(f[11]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  const std::string text = format_csv(rows);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::vector<ResultRow> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace sneakbp::harness
