#include "waterline/compositing.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>

#include "waterline/ascii_grid.hpp"
#include "waterline/features.hpp"

namespace waterline {

namespace {

constexpr double kMetersPerDegree = 111320.0;

std::size_t ceil_cells(double radius_m, double cell_m) {
  // Guard against 500 / 9.9999999999 rounding up to 51.
  return static_cast<std::size_t>(std::ceil(radius_m / cell_m - 1e-9));
}

bool intersects(const GeoTransform& t, const BBox& b) {
  return t.origin_lon < b.lon_max && t.max_lon() > b.lon_min && t.min_lat() < b.lat_max &&
         t.origin_lat > b.lat_min;
}

// Precomputed per-tile contribution in output-grid coordinates.
struct Candidate {
  std::string id;
  std::vector<std::size_t> out_index;  // output cells this tile validly covers
  std::vector<Cell> tile_cell;         // matching tile cells
  std::array<std::vector<std::uint8_t>, 4> value;
};

std::array<std::vector<std::uint8_t>, 4> transform_channels(const SceneTile& tile) {
  std::array<std::vector<std::uint8_t>, 4> out;
  for (std::size_t b = 0; b < 4; ++b) {
    const RealGrid& ch = tile.channels[b];
    RealGrid masked = ch;
    const double nd = ch.nodata().value_or(-9999.0);
    masked.set_nodata(nd);
    for (std::size_t i = 0; i < ch.size(); ++i) {
      if (tile.invalid[i] || ch.is_nodata(i)) masked[i] = nd;
    }
    RealGrid z;
    try {
      z = normalize_channel(masked);
    } catch (const InputError&) {
      // Constant or nearly empty channel: every valid cell sits at the mean.
      z = masked;
      for (std::size_t i = 0; i < z.size(); ++i) {
        if (!masked.is_nodata(i)) z[i] = 0.0;
      }
    }
    out[b].resize(ch.size(), 0);
    for (std::size_t i = 0; i < ch.size(); ++i) {
      if (!z.is_nodata(i)) out[b][i] = sigmoid_transform(z[i]);
    }
  }
  return out;
}

Candidate prepare(const SceneTile& tile, const GeoTransform& out_t, double buffer_m) {
  validate_tile(tile);
  if (!out_t.aligned_with(tile.transform())) {
    throw InputError("tile '" + tile.id + "' is not aligned with the composite grid");
  }
  const BinaryMask buffered = buffer_invalid(tile.invalid, buffer_m);
  auto values = transform_channels(tile);
  const Cell off = grid_offset(out_t, tile.transform());

  Candidate cand;
  cand.id = tile.id;
  const auto& t = tile.transform();
  for (std::size_t r = 0; r < t.n_rows; ++r) {
    for (std::size_t c = 0; c < t.n_cols; ++c) {
      const auto orow = off.row + static_cast<std::ptrdiff_t>(r);
      const auto ocol = off.col + static_cast<std::ptrdiff_t>(c);
      if (!out_t.contains(orow, ocol)) continue;
      const std::size_t i = r * t.n_cols + c;
      if (buffered[i]) continue;
      bool nodata = false;
      for (const auto& ch : tile.channels) nodata = nodata || ch.is_nodata(i);
      if (nodata) continue;
      cand.out_index.push_back(static_cast<std::size_t>(orow) * out_t.n_cols +
                               static_cast<std::size_t>(ocol));
      cand.tile_cell.push_back({static_cast<std::ptrdiff_t>(r), static_cast<std::ptrdiff_t>(c)});
      for (std::size_t b = 0; b < 4; ++b) cand.value[b].push_back(values[b][i]);
    }
  }
  return cand;
}

GeoTransform output_grid(const GeoTransform& ref, const BBox& b) {
  if (!(b.lon_max > b.lon_min) || !(b.lat_max > b.lat_min)) {
    throw InputError("bbox must satisfy lonmin < lonmax and latmin < latmax");
  }
  const double cs = ref.cell_size;
  // Lattice cells of the reference tile whose centres lie inside the box.
  const auto c0 = static_cast<long long>(std::ceil((b.lon_min - ref.origin_lon) / cs - 0.5));
  const auto c1 = static_cast<long long>(std::floor((b.lon_max - ref.origin_lon) / cs - 0.5));
  const auto r0 = static_cast<long long>(std::ceil((ref.origin_lat - b.lat_max) / cs - 0.5));
  const auto r1 = static_cast<long long>(std::floor((ref.origin_lat - b.lat_min) / cs - 0.5));
  if (c1 < c0 || r1 < r0) throw InputError("bbox contains no cell centres");
  return GeoTransform(ref.origin_lon + static_cast<double>(c0) * cs,
                      ref.origin_lat - static_cast<double>(r0) * cs, cs,
                      static_cast<std::size_t>(r1 - r0 + 1), static_cast<std::size_t>(c1 - c0 + 1));
}

}  // namespace

void validate_tile(const SceneTile& tile) {
  check_binary(tile.invalid);
  for (const auto& ch : tile.channels) {
    if (!ch.transform().same_grid(tile.invalid.transform())) {
      throw InputError("tile '" + tile.id + "': channels and mask are not on one grid");
    }
  }
}

double cloud_fraction(const BinaryMask& invalid) {
  std::size_t n = 0;
  for (auto v : invalid.cells()) n += v ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(invalid.size());
}

double cloud_fraction(const SceneTile& tile) { return cloud_fraction(tile.invalid); }

BufferRadius buffer_radius_cells(const GeoTransform& t, double radius_m) {
  if (!(radius_m >= 0.0)) throw InputError("buffer radius must be non-negative");
  if (radius_m == 0.0) return {};
  const double lat = t.center_lat() * std::numbers::pi / 180.0;
  const double cell_h = t.cell_size * kMetersPerDegree;
  const double cell_w = cell_h * std::cos(lat);
  return {ceil_cells(radius_m, cell_h), ceil_cells(radius_m, cell_w)};
}

namespace {

// Half-width of the structuring element on row offset dr.
std::size_t half_width(const BufferRadius& rad, std::ptrdiff_t dr) {
  if (rad.rows == 0) return rad.cols;
  const double f = static_cast<double>(dr) / static_cast<double>(rad.rows);
  const double w = static_cast<double>(rad.cols) * std::sqrt(std::max(0.0, 1.0 - f * f));
  return static_cast<std::size_t>(std::floor(w + 1e-9));
}

}  // namespace

namespace serial {

BinaryMask buffer_invalid(const BinaryMask& mask, double radius_m) {
  const BufferRadius rad = buffer_radius_cells(mask.transform(), radius_m);
  if (rad.rows == 0 && rad.cols == 0) return mask;
  std::vector<Cell> offsets;
  const auto ry = static_cast<std::ptrdiff_t>(rad.rows);
  const auto rx = static_cast<std::ptrdiff_t>(rad.cols);
  for (std::ptrdiff_t dr = -ry; dr <= ry; ++dr) {
    for (std::ptrdiff_t dc = -rx; dc <= rx; ++dc) {
      const double a = ry ? static_cast<double>(dr) / static_cast<double>(ry) : 0.0;
      const double b = rx ? static_cast<double>(dc) / static_cast<double>(rx) : 0.0;
      if (a * a + b * b <= 1.0 + 1e-12) offsets.push_back({dr, dc});
    }
  }
  BinaryMask out(mask.transform(), std::uint8_t{0});
  const auto& t = mask.transform();
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t c = 0; c < mask.cols(); ++c) {
      if (!mask(r, c)) continue;
      for (const Cell& o : offsets) {
        const auto nr = static_cast<std::ptrdiff_t>(r) + o.row;
        const auto nc = static_cast<std::ptrdiff_t>(c) + o.col;
        if (t.contains(nr, nc)) out(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)) = 1;
      }
    }
  }
  return out;
}

}  // namespace serial

BinaryMask buffer_invalid(const BinaryMask& mask, double radius_m) {
  const BufferRadius rad = buffer_radius_cells(mask.transform(), radius_m);
  if (rad.rows == 0 && rad.cols == 0) return mask;
  const std::size_t rows = mask.rows();
  const std::size_t cols = mask.cols();

  // prefix[r][c] = number of set cells in row r before column c.
  std::vector<std::uint32_t> prefix(rows * (cols + 1), 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(rows); ++r) {
    auto* p = &prefix[static_cast<std::size_t>(r) * (cols + 1)];
    for (std::size_t c = 0; c < cols; ++c) p[c + 1] = p[c] + mask(static_cast<std::size_t>(r), c);
  }

  std::vector<std::size_t> widths;
  const auto ry = static_cast<std::ptrdiff_t>(rad.rows);
  for (std::ptrdiff_t dr = -ry; dr <= ry; ++dr) widths.push_back(half_width(rad, dr));

  BinaryMask out(mask.transform(), std::uint8_t{0});
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(rows); ++r) {
    for (std::ptrdiff_t dr = -ry; dr <= ry; ++dr) {
      const auto sr = r + dr;
      if (sr < 0 || sr >= static_cast<std::ptrdiff_t>(rows)) continue;
      const auto* p = &prefix[static_cast<std::size_t>(sr) * (cols + 1)];
      if (p[cols] == 0) continue;
      const std::size_t w = widths[static_cast<std::size_t>(dr + ry)];
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t lo = c >= w ? c - w : 0;
        const std::size_t hi = std::min(cols, c + w + 1);
        if (p[hi] != p[lo]) out(static_cast<std::size_t>(r), c) = 1;
      }
    }
  }
  return out;
}

InMemoryTileProvider::InMemoryTileProvider(std::vector<SceneTile> tiles) : tiles_(std::move(tiles)) {
  for (const auto& t : tiles_) validate_tile(t);
}

std::vector<TileSummary> InMemoryTileProvider::enumerate(const BBox& bbox) {
  std::vector<TileSummary> out;
  for (const auto& t : tiles_) {
    if (intersects(t.transform(), bbox)) out.push_back({t.id, cloud_fraction(t)});
  }
  std::stable_sort(out.begin(), out.end(), [](const TileSummary& a, const TileSummary& b) {
    return a.cloud_fraction < b.cloud_fraction;
  });
  return out;
}

SceneTile InMemoryTileProvider::fetch(const std::string& id) {
  for (const auto& t : tiles_) {
    if (t.id == id) return t;
  }
  throw InputError("unknown tile id '" + id + "'");
}

ManifestTileProvider::ManifestTileProvider(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw InputError("cannot open manifest: " + manifest.string());
  const auto base = manifest.parent_path();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    Entry e;
    if (!(fields >> e.id)) continue;
    for (auto& p : e.paths) {
      std::string s;
      if (!(fields >> s)) {
        throw InputError(manifest.string() + ":" + std::to_string(lineno) +
                         ": expected 'id nir red green blue mask'");
      }
      p = std::filesystem::path(s).is_absolute() ? std::filesystem::path(s) : base / s;
    }
    entries_.push_back(std::move(e));
  }
  if (entries_.empty()) throw InputError("manifest lists no tiles: " + manifest.string());
}

const ManifestTileProvider::Entry& ManifestTileProvider::entry(const std::string& id) const {
  for (const auto& e : entries_) {
    if (e.id == id) return e;
  }
  throw InputError("unknown tile id '" + id + "'");
}

SceneTile ManifestTileProvider::load(const Entry& e) const {
  SceneTile t;
  t.id = e.id;
  for (std::size_t b = 0; b < 4; ++b) t.channels[b] = read_ascii_grid(e.paths[b]);
  const RealGrid m = read_ascii_grid(e.paths[4]);
  t.invalid = binarize(m, 0.5);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.is_nodata(i)) t.invalid[i] = 1;
  }
  validate_tile(t);
  return t;
}

std::vector<TileSummary> ManifestTileProvider::enumerate(const BBox& bbox) {
  std::vector<TileSummary> out;
  for (const auto& e : entries_) {
    auto it = cache_.find(e.id);
    if (it == cache_.end()) it = cache_.emplace(e.id, load(e)).first;
    if (intersects(it->second.transform(), bbox)) out.push_back({e.id, cloud_fraction(it->second)});
  }
  std::stable_sort(out.begin(), out.end(), [](const TileSummary& a, const TileSummary& b) {
    return a.cloud_fraction < b.cloud_fraction;
  });
  return out;
}

SceneTile ManifestTileProvider::fetch(const std::string& id) {
  auto it = cache_.find(id);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(id, load(entry(id))).first->second;
}

CompositeResult greedy_composite(TileProvider& provider, const BBox& bbox,
                                 const CompositeOptions& opt) {
  if (!(opt.cloud_threshold >= 0.0 && opt.cloud_threshold <= 1.0)) {
    throw InputError("cloud threshold must lie in [0, 1]");
  }
  const auto listing = provider.enumerate(bbox);
  if (listing.empty()) throw InputError("tile provider returned no candidate tiles");

  std::vector<SceneTile> tiles;
  tiles.reserve(listing.size());
  for (const auto& s : listing) tiles.push_back(provider.fetch(s.id));

  const GeoTransform out_t = output_grid(tiles.front().transform(), bbox);
  std::vector<Candidate> cands(tiles.size());
  std::vector<std::exception_ptr> errors(tiles.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(tiles.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      cands[k] = prepare(tiles[k], out_t, opt.buffer_m);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const std::size_t n = out_t.size();
  std::vector<std::uint8_t> covered(n, 0);
  std::array<std::vector<std::uint32_t>, 4> sum;
  for (auto& s : sum) s.assign(n, 0);
  std::vector<std::uint32_t> count(n, 0);
  std::vector<bool> used(cands.size(), false);

  CompositeResult res;
  std::size_t uncovered = n;
  const auto done = [&] {
    return res.accepted.size() >= opt.min_tiles &&
           static_cast<double>(uncovered) / static_cast<double>(n) <= opt.cloud_threshold;
  };

  while (!done()) {
    std::size_t best = cands.size();
    std::size_t best_gain = 0;
    for (std::size_t k = 0; k < cands.size(); ++k) {
      if (used[k]) continue;
      std::size_t gain = 0;
      for (auto idx : cands[k].out_index) gain += covered[idx] ? 0 : 1;
      if (best == cands.size() || gain > best_gain) {
        best = k;
        best_gain = gain;
      }
    }
    if (best == cands.size()) break;
    if (best_gain == 0 && res.accepted.size() >= opt.min_tiles) break;

    used[best] = true;
    const Candidate& c = cands[best];
    res.accepted.push_back(c.id);
    for (std::size_t j = 0; j < c.out_index.size(); ++j) {
      const std::size_t idx = c.out_index[j];
      if (!covered[idx]) {
        covered[idx] = 1;
        --uncovered;
      }
      ++count[idx];
      for (std::size_t b = 0; b < 4; ++b) sum[b][idx] += c.value[b][j];
      if (opt.on_contribution) {
        opt.on_contribution(c.id, c.tile_cell[j],
                            {static_cast<std::ptrdiff_t>(idx / out_t.n_cols),
                             static_cast<std::ptrdiff_t>(idx % out_t.n_cols)});
      }
    }
  }

  res.coverage = BinaryMask(out_t, std::uint8_t{0});
  for (std::size_t b = 0; b < 4; ++b) res.nrgb[b] = GeoGrid<std::uint8_t>(out_t, std::uint8_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    if (!count[i]) continue;
    res.coverage[i] = 1;
    for (std::size_t b = 0; b < 4; ++b) {
      const double mean = static_cast<double>(sum[b][i]) / static_cast<double>(count[i]);
      res.nrgb[b][i] = static_cast<std::uint8_t>(std::round(mean));
    }
  }
  res.uncovered_fraction = static_cast<double>(uncovered) / static_cast<double>(n);
  return res;
}

}  // namespace waterline
