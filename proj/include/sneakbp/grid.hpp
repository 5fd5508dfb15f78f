#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sneakbp {

/// Zero-based position of a crossbar cell.
struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Dense row-major M x N matrix. Cell (i, j) lives at flat index i * cols + j,
/// which is also the codeword position used when storing a polar codeword.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int r, int c) { return data_[index(r, c)]; }
  const T& operator()(int r, int c) const { return data_[index(r, c)]; }
  T& operator[](Cell cell) { return (*this)(cell.row, cell.col); }
  const T& operator[](Cell cell) const { return (*this)(cell.row, cell.col); }

  T& at_flat(std::size_t t) { return data_.at(t); }
  const T& at_flat(std::size_t t) const { return data_.at(t); }

  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool same_shape(int rows, int cols) const { return rows_ == rows && cols_ == cols; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_size(int rows, int cols) {
    if (rows <= 0 || cols <= 0) {
      throw std::invalid_argument("grid dimensions must be positive, got " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
    }
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using BitGrid = Grid<std::uint8_t>;

}  // namespace sneakbp
