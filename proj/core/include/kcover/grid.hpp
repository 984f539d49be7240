#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include "kcover/errors.hpp"

namespace kcover {

/// Horizontal cell index. `i` runs along x (columns), `j` along y (rows).
struct Cell {
  int i = 0;
  int j = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Dense row-major 2D array; entry (i, j) lives at j * width + i.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    if (width < 0 || height < 0) throw DomainError("grid dimensions must be nonnegative");
  }
  Grid(int width, int height, std::vector<T> values)
      : width_(width), height_(height), data_(std::move(values)) {
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw DomainError("grid value count does not match dimensions");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  bool contains(Cell c) const noexcept {
    return c.i >= 0 && c.j >= 0 && c.i < width_ && c.j < height_;
  }
  std::size_t index(Cell c) const noexcept {
    return static_cast<std::size_t>(c.j) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.i);
  }
  Cell cell(std::size_t idx) const noexcept {
    return {static_cast<int>(idx % static_cast<std::size_t>(width_)),
            static_cast<int>(idx / static_cast<std::size_t>(width_))};
  }

  T& operator[](Cell c) noexcept { return data_[index(c)]; }
  const T& operator[](Cell c) const noexcept { return data_[index(c)]; }
  T& operator()(int i, int j) noexcept { return data_[index({i, j})]; }
  const T& operator()(int i, int j) const noexcept { return data_[index({i, j})]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  template <class U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

}  // namespace kcover
