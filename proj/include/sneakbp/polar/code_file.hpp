#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sneakbp/polar/code_spec.hpp"

namespace sneakbp::polar {

/// Line 1: "N K"; line 2: the ascending info indices separated by spaces.
inline std::string format_code(const PolarCodeSpec& spec) {
  std::ostringstream os;
  os << spec.block_length() << ' ' << spec.dimension() << '\n';
  for (std::size_t k = 0; k < spec.info_set().size(); ++k) os << (k ? " " : "") << spec.info_set()[k];
  os << '\n';
  return os.str();
}

inline PolarCodeSpec parse_code(const std::string& text) {
  std::istringstream is(text);
  int n = 0;
  int k = 0;
  if (!(is >> n >> k)) throw std::runtime_error("code file: missing 'N K' header");
  std::vector<int> info;
  int idx = 0;
  while (is >> idx) info.push_back(idx);
  if (!is.eof()) throw std::runtime_error("code file: malformed index list");
  if (static_cast<int>(info.size()) != k)
    throw std::runtime_error("code file: header says K=" + std::to_string(k) + " but lists " +
                             std::to_string(info.size()) + " indices");
  if (!std::is_sorted(info.begin(), info.end())) throw std::runtime_error("code file: indices not ascending");
  return PolarCodeSpec(n, std::move(info));
}

inline void write_code_file(const PolarCodeSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << format_code(spec);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline PolarCodeSpec read_code_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open code file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_code(buf.str());
}

}  // namespace sneakbp::polar
