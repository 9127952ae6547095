#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace waterline {

/// Raised for malformed or inconsistent inputs (bad shapes, misaligned grids,
/// unparseable files). The CLI maps it to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct Cell {
  std::ptrdiff_t row = 0;
  std::ptrdiff_t col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Top-left anchored, north-up grid geometry in geographic degrees.
struct GeoTransform {
  double origin_lon = 0.0;
  double origin_lat = 0.0;
  double cell_size = 1.0;
  std::size_t n_rows = 1;
  std::size_t n_cols = 1;

  GeoTransform() = default;
  GeoTransform(double lon, double lat, double cs, std::size_t rows, std::size_t cols);

  std::size_t size() const { return n_rows * n_cols; }
  bool contains(std::ptrdiff_t r, std::ptrdiff_t c) const {
    return r >= 0 && c >= 0 && static_cast<std::size_t>(r) < n_rows &&
           static_cast<std::size_t>(c) < n_cols;
  }
  GeoPoint cell_center(std::size_t r, std::size_t c) const {
    return {origin_lon + (static_cast<double>(c) + 0.5) * cell_size,
            origin_lat - (static_cast<double>(r) + 0.5) * cell_size};
  }
  double max_lon() const { return origin_lon + static_cast<double>(n_cols) * cell_size; }
  double min_lat() const { return origin_lat - static_cast<double>(n_rows) * cell_size; }
  double center_lat() const { return origin_lat - 0.5 * static_cast<double>(n_rows) * cell_size; }

  /// Same cell size, same shape and same origin (to a tiny fraction of a cell).
  bool same_grid(const GeoTransform& other) const;
  /// Same cell size and origins offset by a whole number of cells.
  bool aligned_with(const GeoTransform& other) const;
};

/// Cell containing the point, or nullopt when the point is off the grid.
/// Cell footprints are half-open: [left, right) x (bottom, top].
std::optional<Cell> geo_to_pixel(const GeoTransform& t, double lon, double lat);
GeoPoint pixel_to_geo(const GeoTransform& t, std::size_t r, std::size_t c);

template <typename T>
class GeoGrid {
 public:
  using value_type = T;

  GeoGrid() = default;
  explicit GeoGrid(GeoTransform t, T fill = T{}, std::optional<T> nodata = std::nullopt)
      : transform_(t), cells_(t.size(), fill), nodata_(nodata) {}
  GeoGrid(GeoTransform t, std::vector<T> cells, std::optional<T> nodata = std::nullopt)
      : transform_(t), cells_(std::move(cells)), nodata_(nodata) {
    if (cells_.size() != transform_.size()) {
      throw InputError("grid cell count " + std::to_string(cells_.size()) +
                       " does not match " + std::to_string(transform_.n_rows) + "x" +
                       std::to_string(transform_.n_cols));
    }
  }

  const GeoTransform& transform() const { return transform_; }
  std::size_t rows() const { return transform_.n_rows; }
  std::size_t cols() const { return transform_.n_cols; }
  std::size_t size() const { return cells_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return cells_[r * transform_.n_cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return cells_[r * transform_.n_cols + c];
  }
  T& operator[](std::size_t i) { return cells_[i]; }
  const T& operator[](std::size_t i) const { return cells_[i]; }

  std::vector<T>& cells() { return cells_; }
  const std::vector<T>& cells() const { return cells_; }

  const std::optional<T>& nodata() const { return nodata_; }
  void set_nodata(std::optional<T> nd) { nodata_ = nd; }

  bool is_nodata(std::size_t i) const {
    if constexpr (std::is_floating_point_v<T>) {
      if (std::isnan(cells_[i])) return true;
    }
    return nodata_ && cells_[i] == *nodata_;
  }
  bool is_valid(std::size_t r, std::size_t c) const { return !is_nodata(r * cols() + c); }

  friend bool operator==(const GeoGrid& a, const GeoGrid& b) {
    return a.transform_.same_grid(b.transform_) && a.cells_ == b.cells_ && a.nodata_ == b.nodata_;
  }

 private:
  GeoTransform transform_;
  std::vector<T> cells_;
  std::optional<T> nodata_;
};

using RealGrid = GeoGrid<double>;
using LabelGrid = GeoGrid<std::int32_t>;
/// Cell values strictly 0 or 1.
using BinaryMask = GeoGrid<std::uint8_t>;

/// Throws InputError unless every cell is 0 or 1.
void check_binary(const BinaryMask& mask);

enum class Connectivity { Four = 4, Eight = 8 };

/// In-bounds neighbours of (r, c) in a fixed clockwise order starting north.
std::vector<Cell> neighbors(const GeoTransform& t, std::ptrdiff_t r, std::ptrdiff_t c,
                            Connectivity conn);

/// Smallest grid covering every tile. Tiles must share cell size and grid
/// alignment; overlapping valid cells must agree exactly. Uncovered cells are
/// set to `fill_nodata` and the result carries that nodata value.
RealGrid merge_tiles(const std::vector<RealGrid>& tiles, double fill_nodata = -9999.0);

/// Row/column offset of `inner`'s origin within `outer` (requires alignment).
Cell grid_offset(const GeoTransform& outer, const GeoTransform& inner);

}  // namespace waterline
