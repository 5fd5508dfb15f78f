#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sneakbp/channel.hpp"
#include "sneakbp/grid.hpp"

namespace sneakbp {

/// Pre-detection outcome per cell: confidently high, definitely low, or the
/// uncertain resistance R_s (either a true low cell or a sneak-affected high cell).
enum class CellLabel : std::uint8_t { high, low, uncertain };

using LabelGrid = Grid<CellLabel>;

enum class RefineMode { fixed_point, single_pass };

/// HighR0 iff R0 is the most likely of {R0, R0', R1}; everything else is R_s.
inline LabelGrid pre_detect(const Grid<double>& y, const ChannelParams& params) {
  const LevelLikelihood lik(params);
  LabelGrid labels(y.rows(), y.cols(), CellLabel::uncertain);
  constexpr std::array<Level, 3> levels{Level::high, Level::low, Level::sneak};
  for (int i = 0; i < y.rows(); ++i)
    for (int j = 0; j < y.cols(); ++j)
      if (lik.most_likely(y(i, j), levels) == Level::high) labels(i, j) = CellLabel::high;
  return labels;
}

/// Relabels R_s cells with no other R_s cell in their row or in their column
/// as definitely low. Fixed-point mode repeats the pass until no label changes.
inline LabelGrid refine_definite_low(LabelGrid labels, RefineMode mode = RefineMode::fixed_point) {
  const int m = labels.rows();
  const int n = labels.cols();
  std::vector<int> row_count(m);
  std::vector<int> col_count(n);
  bool changed = true;
  while (changed) {
    changed = false;
    std::fill(row_count.begin(), row_count.end(), 0);
    std::fill(col_count.begin(), col_count.end(), 0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        if (labels(i, j) == CellLabel::uncertain) {
          ++row_count[i];
          ++col_count[j];
        }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        if (labels(i, j) == CellLabel::uncertain && (row_count[i] < 2 || col_count[j] < 2)) {
          labels(i, j) = CellLabel::low;
          changed = true;
        }
    if (mode == RefineMode::single_pass) break;
  }
  return labels;
}

}  // namespace sneakbp
