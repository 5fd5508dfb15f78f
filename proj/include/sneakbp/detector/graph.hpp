#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "sneakbp/detector/labels.hpp"

namespace sneakbp {

/// Tanner graph over the R_s cells. Every node is both a selector-failure
/// node and a sneak-path node. Diagonal partners D(a) are the R_s cells
/// (u,v), u != i, v != j, whose corners (u,j) and (i,v) are also R_s; the
/// relation is symmetric, so edge k of node a doubles as "failure node a ->
/// sneak node partner" and "sneak node a -> failure node partner".
/// Detection-aiding cells Z(a) are confidently high cells (u,v) with R_s
/// corners (u,j) and (i,v).
class DetectionGraph {
 public:
  DetectionGraph() = default;

  explicit DetectionGraph(const LabelGrid& labels)
      : node_of_(labels.rows(), labels.cols(), -1) {
    const int m = labels.rows();
    const int n = labels.cols();
    auto uncertain = [&](int r, int c) { return labels(r, c) == CellLabel::uncertain; };
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        if (uncertain(i, j)) {
          node_of_(i, j) = static_cast<int>(nodes_.size());
          nodes_.push_back({i, j});
        }

    edge_offset_.reserve(nodes_.size() + 1);
    aiding_offset_.reserve(nodes_.size() + 1);
    edge_offset_.push_back(0);
    aiding_offset_.push_back(0);
    partner_.reserve(nodes_.size() * 16);
    aiding_.reserve(nodes_.size() * 16);
    std::vector<int> rows_with;
    std::vector<int> cols_with;
    for (const Cell a : nodes_) {
      rows_with.clear();
      cols_with.clear();
      for (int u = 0; u < m; ++u)
        if (u != a.row && uncertain(u, a.col)) rows_with.push_back(u);
      for (int v = 0; v < n; ++v)
        if (v != a.col && uncertain(a.row, v)) cols_with.push_back(v);
      for (int u : rows_with)
        for (int v : cols_with) {
          if (uncertain(u, v))
            partner_.push_back(node_of_(u, v));
          else if (labels(u, v) == CellLabel::high)
            aiding_.push_back({u, v});
        }
      edge_offset_.push_back(static_cast<int>(partner_.size()));
      aiding_offset_.push_back(static_cast<int>(aiding_.size()));
    }

    // Partner lists are ascending in node index, so visiting nodes in order
    // meets each partner's entries in order as well.
    reverse_.resize(partner_.size());
    std::vector<int> cursor(edge_offset_.begin(), edge_offset_.end() - 1);
    for (int a = 0; a < node_count(); ++a)
      for (int e = edge_offset_[a]; e < edge_offset_[a + 1]; ++e) reverse_[e] = cursor[partner_[e]]++;
  }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int edge_count() const { return static_cast<int>(partner_.size()); }
  bool empty() const { return nodes_.empty(); }

  Cell cell(int node) const { return nodes_[node]; }
  const std::vector<Cell>& cells() const { return nodes_; }
  /// Node index of a cell, or -1 for decided cells.
  int node_of(Cell c) const { return node_of_[c]; }
  const Grid<int>& node_map() const { return node_of_; }

  int first_edge(int node) const { return edge_offset_[node]; }
  int last_edge(int node) const { return edge_offset_[node + 1]; }
  int degree(int node) const { return last_edge(node) - first_edge(node); }
  int partner(int edge) const { return partner_[edge]; }
  /// Edge index of the same pair seen from the partner's side.
  int reverse(int edge) const { return reverse_[edge]; }

  std::vector<Cell> diagonal_cells(int node) const {
    std::vector<Cell> out;
    for (int e = first_edge(node); e < last_edge(node); ++e) out.push_back(nodes_[partner_[e]]);
    return out;
  }

  std::span<const Cell> aiding_cells(int node) const {
    return {aiding_.data() + aiding_offset_[node],
            static_cast<std::size_t>(aiding_offset_[node + 1] - aiding_offset_[node])};
  }

 private:
  std::vector<Cell> nodes_;
  Grid<int> node_of_;
  std::vector<int> edge_offset_;
  std::vector<int> partner_;
  std::vector<int> reverse_;
  std::vector<int> aiding_offset_;
  std::vector<Cell> aiding_;
};

inline DetectionGraph build_graph(const LabelGrid& labels) { return DetectionGraph(labels); }

}  // namespace sneakbp
