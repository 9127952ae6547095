#include "waterline/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace waterline {

namespace {

constexpr double kAlignTol = 1e-6;  // fraction of a cell

bool near_integer(double v) { return std::abs(v - std::round(v)) < kAlignTol; }

bool same_cell_size(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

GeoTransform::GeoTransform(double lon, double lat, double cs, std::size_t rows, std::size_t cols)
    : origin_lon(lon), origin_lat(lat), cell_size(cs), n_rows(rows), n_cols(cols) {
  if (!(cs > 0.0) || !std::isfinite(cs)) throw InputError("cell size must be positive");
  if (rows == 0 || cols == 0) throw InputError("grid must have at least one row and column");
  if (!std::isfinite(lon) || !std::isfinite(lat)) throw InputError("grid origin must be finite");
}

bool GeoTransform::aligned_with(const GeoTransform& o) const {
  if (!same_cell_size(cell_size, o.cell_size)) return false;
  return near_integer((o.origin_lon - origin_lon) / cell_size) &&
         near_integer((origin_lat - o.origin_lat) / cell_size);
}

bool GeoTransform::same_grid(const GeoTransform& o) const {
  return n_rows == o.n_rows && n_cols == o.n_cols && aligned_with(o) &&
         std::abs(o.origin_lon - origin_lon) < kAlignTol * cell_size &&
         std::abs(o.origin_lat - origin_lat) < kAlignTol * cell_size;
}

std::optional<Cell> geo_to_pixel(const GeoTransform& t, double lon, double lat) {
  if (!std::isfinite(lon) || !std::isfinite(lat)) return std::nullopt;
  const double fc = std::floor((lon - t.origin_lon) / t.cell_size);
  const double fr = std::floor((t.origin_lat - lat) / t.cell_size);
  if (fc < 0 || fr < 0 || fc >= static_cast<double>(t.n_cols) ||
      fr >= static_cast<double>(t.n_rows)) {
    return std::nullopt;
  }
  return Cell{static_cast<std::ptrdiff_t>(fr), static_cast<std::ptrdiff_t>(fc)};
}

GeoPoint pixel_to_geo(const GeoTransform& t, std::size_t r, std::size_t c) {
  return t.cell_center(r, c);
}

void check_binary(const BinaryMask& mask) {
  for (auto v : mask.cells()) {
    if (v > 1) throw InputError("mask values must be 0 or 1");
  }
}

std::vector<Cell> neighbors(const GeoTransform& t, std::ptrdiff_t r, std::ptrdiff_t c,
                            Connectivity conn) {
  if (!t.contains(r, c)) {
    throw InputError("cell (" + std::to_string(r) + ", " + std::to_string(c) +
                     ") is outside the grid");
  }
  // N, NE, E, SE, S, SW, W, NW
  static constexpr std::array<std::array<int, 2>, 8> kRing = {
      {{-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}}};
  std::vector<Cell> out;
  out.reserve(8);
  for (std::size_t k = 0; k < kRing.size(); ++k) {
    if (conn == Connectivity::Four && (k % 2) == 1) continue;
    const auto nr = r + kRing[k][0];
    const auto nc = c + kRing[k][1];
    if (t.contains(nr, nc)) out.push_back({nr, nc});
  }
  return out;
}

Cell grid_offset(const GeoTransform& outer, const GeoTransform& inner) {
  if (!outer.aligned_with(inner)) throw InputError("grids are not aligned");
  return {static_cast<std::ptrdiff_t>(
              std::llround((outer.origin_lat - inner.origin_lat) / outer.cell_size)),
          static_cast<std::ptrdiff_t>(
              std::llround((inner.origin_lon - outer.origin_lon) / outer.cell_size))};
}

RealGrid merge_tiles(const std::vector<RealGrid>& tiles, double fill_nodata) {
  if (tiles.empty()) throw InputError("merge_tiles needs at least one tile");
  const GeoTransform& ref = tiles.front().transform();

  std::ptrdiff_t min_r = std::numeric_limits<std::ptrdiff_t>::max();
  std::ptrdiff_t min_c = min_r;
  std::ptrdiff_t max_r = std::numeric_limits<std::ptrdiff_t>::min();
  std::ptrdiff_t max_c = max_r;
  double cs = ref.cell_size;
  std::vector<Cell> offsets;
  offsets.reserve(tiles.size());
  for (const auto& tile : tiles) {
    const auto& t = tile.transform();
    if (!ref.aligned_with(t)) throw InputError("merge_tiles: tiles are not grid-aligned");
    const Cell off = grid_offset(ref, t);
    offsets.push_back(off);
    min_r = std::min(min_r, off.row);
    min_c = std::min(min_c, off.col);
    max_r = std::max(max_r, off.row + static_cast<std::ptrdiff_t>(t.n_rows));
    max_c = std::max(max_c, off.col + static_cast<std::ptrdiff_t>(t.n_cols));
    cs = std::min(cs, t.cell_size);
  }

  // Take the origin verbatim from the tiles on the north and west edges so
  // the result does not depend on which tile came first.
  double lon0 = std::numeric_limits<double>::infinity();
  double lat0 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    if (offsets[i].col == min_c) lon0 = std::min(lon0, tiles[i].transform().origin_lon);
    if (offsets[i].row == min_r) lat0 = std::max(lat0, tiles[i].transform().origin_lat);
  }

  const GeoTransform out_t(lon0, lat0, cs, static_cast<std::size_t>(max_r - min_r),
                           static_cast<std::size_t>(max_c - min_c));
  RealGrid out(out_t, fill_nodata, fill_nodata);
  std::vector<std::uint8_t> written(out_t.size(), 0);

  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const auto& tile = tiles[i];
    const auto dr = static_cast<std::size_t>(offsets[i].row - min_r);
    const auto dc = static_cast<std::size_t>(offsets[i].col - min_c);
    for (std::size_t r = 0; r < tile.rows(); ++r) {
      for (std::size_t c = 0; c < tile.cols(); ++c) {
        if (!tile.is_valid(r, c)) continue;
        const std::size_t k = (r + dr) * out_t.n_cols + (c + dc);
        const double v = tile(r, c);
        if (written[k] && out[k] != v) {
          throw InputError("merge_tiles: overlapping tiles disagree at row " +
                           std::to_string(r + dr) + ", col " + std::to_string(c + dc));
        }
        out[k] = v;
        written[k] = 1;
      }
    }
  }
  return out;
}

}  // namespace waterline
