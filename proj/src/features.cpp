#include "waterline/features.hpp"

#include <cmath>
#include <limits>

namespace waterline {

namespace {

constexpr double kNoData = -9999.0;

double nodata_of(const RealGrid& g) { return g.nodata().value_or(kNoData); }

void require_same_grid(const RealGrid& a, const RealGrid& b, const char* what) {
  if (!a.transform().same_grid(b.transform())) {
    throw InputError(std::string(what) + ": input grids are not aligned");
  }
}

void check_spread(std::size_t n, double sd) {
  if (n < 2) throw InputError("normalize_channel: need at least two valid cells");
  if (!(sd > 0.0)) throw InputError("normalize_channel: channel is constant (zero spread)");
}

double index_value(double a, double b) {
  const double den = a + b;
  return den == 0.0 ? 0.0 : (a - b) / den;
}

// One cell of the difference stencil along an axis. `lo`/`hi` are the
// neighbour values when present and valid.
double axis_delta(std::optional<double> lo, double mid, std::optional<double> hi) {
  if (lo && hi) return 0.5 * (*hi - *lo);
  if (hi) return *hi - mid;
  if (lo) return mid - *lo;
  return 0.0;
}

void elevation_cell(const RealGrid& e, std::size_t r, std::size_t c, double min_e,
                    ElevationChannels& out) {
  const std::size_t i = r * e.cols() + c;
  if (e.is_nodata(i)) return;
  auto at = [&](std::ptrdiff_t rr, std::ptrdiff_t cc) -> std::optional<double> {
    if (!e.transform().contains(rr, cc)) return std::nullopt;
    const auto k = static_cast<std::size_t>(rr) * e.cols() + static_cast<std::size_t>(cc);
    if (e.is_nodata(k)) return std::nullopt;
    return e[k];
  };
  const auto sr = static_cast<std::ptrdiff_t>(r);
  const auto sc = static_cast<std::ptrdiff_t>(c);
  const double dx = axis_delta(at(sr, sc - 1), e[i], at(sr, sc + 1));
  const double dy = axis_delta(at(sr - 1, sc), e[i], at(sr + 1, sc));
  out.shifted[i] = e[i] - min_e;
  out.delta_x[i] = dx;
  out.delta_y[i] = dy;
  out.gradient[i] = std::sqrt(dx * dx + dy * dy);
}

ElevationChannels blank_channels(const RealGrid& e) {
  if (e.rows() < 2 || e.cols() < 2) {
    throw InputError("elevation_channels: elevation grid must be at least 2x2");
  }
  const double nd = nodata_of(e);
  RealGrid blank(e.transform(), nd, nd);
  return {blank, blank, blank, blank};
}

double valid_min(const RealGrid& e) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!e.is_nodata(i)) m = std::min(m, e[i]);
  }
  if (!std::isfinite(m)) throw InputError("elevation_channels: no valid elevation cells");
  return m;
}

}  // namespace

std::uint8_t sigmoid_transform(double x) {
  const double y = 255.0 / (1.0 + std::exp(-0.6 * x));
  return static_cast<std::uint8_t>(std::round(y));
}

namespace serial {

RealGrid normalize_channel(const RealGrid& values) {
  std::size_t n = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values.is_nodata(i)) continue;
    ++n;
    sum += values[i];
  }
  const double mean = n ? sum / static_cast<double>(n) : 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values.is_nodata(i)) sq += (values[i] - mean) * (values[i] - mean);
  }
  const double sd = n ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
  check_spread(n, sd);

  RealGrid out = values;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values.is_nodata(i)) out[i] = (values[i] - mean) / sd;
  }
  return out;
}

ElevationChannels elevation_channels(const RealGrid& e) {
  ElevationChannels out = blank_channels(e);
  const double min_e = valid_min(e);
  for (std::size_t r = 0; r < e.rows(); ++r) {
    for (std::size_t c = 0; c < e.cols(); ++c) elevation_cell(e, r, c, min_e, out);
  }
  return out;
}

RealGrid ndvi(const RealGrid& nir, const RealGrid& red) {
  require_same_grid(nir, red, "ndvi");
  const double nd = nodata_of(nir);
  RealGrid out(nir.transform(), nd, nd);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!nir.is_nodata(i) && !red.is_nodata(i)) out[i] = index_value(nir[i], red[i]);
  }
  return out;
}

}  // namespace serial

RealGrid normalize_channel(const RealGrid& values) {
  // Per-row partial sums folded in row order: the result does not depend on
  // the thread count.
  const std::size_t rows = values.rows();
  const std::size_t cols = values.cols();
  std::vector<double> row_sum(rows, 0.0);
  std::vector<std::size_t> row_n(rows, 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(rows); ++r) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      if (values.is_nodata(i)) continue;
      s += values[i];
      ++n;
    }
    row_sum[static_cast<std::size_t>(r)] = s;
    row_n[static_cast<std::size_t>(r)] = n;
  }
  std::size_t n = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    n += row_n[r];
    sum += row_sum[r];
  }
  const double mean = n ? sum / static_cast<double>(n) : 0.0;

  std::vector<double> row_sq(rows, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(rows); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      if (!values.is_nodata(i)) s += (values[i] - mean) * (values[i] - mean);
    }
    row_sq[static_cast<std::size_t>(r)] = s;
  }
  double sq = 0.0;
  for (double s : row_sq) sq += s;
  const double sd = n ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
  check_spread(n, sd);

  RealGrid out = values;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(values.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!values.is_nodata(k)) out[k] = (values[k] - mean) / sd;
  }
  return out;
}

ElevationChannels elevation_channels(const RealGrid& e) {
  ElevationChannels out = blank_channels(e);
  const double min_e = valid_min(e);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(e.rows()); ++r) {
    for (std::size_t c = 0; c < e.cols(); ++c) {
      elevation_cell(e, static_cast<std::size_t>(r), c, min_e, out);
    }
  }
  return out;
}

namespace {

RealGrid spectral_index(const RealGrid& a, const RealGrid& b, const char* what) {
  require_same_grid(a, b, what);
  const double nd = nodata_of(a);
  RealGrid out(a.transform(), nd, nd);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(out.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!a.is_nodata(k) && !b.is_nodata(k)) out[k] = index_value(a[k], b[k]);
  }
  return out;
}

}  // namespace

RealGrid ndvi(const RealGrid& nir, const RealGrid& red) { return spectral_index(nir, red, "ndvi"); }

RealGrid ndwi(const RealGrid& green, const RealGrid& nir) {
  return spectral_index(green, nir, "ndwi");
}

RealGrid resample_nearest(const RealGrid& src, const GeoTransform& target) {
  const double nd = nodata_of(src);
  RealGrid out(target, nd, nd);
  for (std::size_t r = 0; r < target.n_rows; ++r) {
    for (std::size_t c = 0; c < target.n_cols; ++c) {
      const GeoPoint p = target.cell_center(r, c);
      const auto cell = geo_to_pixel(src.transform(), p.lon, p.lat);
      if (!cell) {
        throw InputError("resample: target cell (" + std::to_string(r) + ", " +
                         std::to_string(c) + ") lies outside the source grid");
      }
      const auto k = static_cast<std::size_t>(cell->row) * src.cols() +
                     static_cast<std::size_t>(cell->col);
      out(r, c) = src.is_nodata(k) ? nd : src[k];
    }
  }
  return out;
}

ChannelStack assemble_stack(const std::array<RealGrid, 4>& nrgb_t, const RealGrid& elevation,
                            const std::optional<std::array<RealGrid, 4>>& raw_nrgb) {
  const GeoTransform& t = nrgb_t[0].transform();
  for (const auto& g : nrgb_t) require_same_grid(nrgb_t[0], g, "assemble_stack");
  const auto& bands = raw_nrgb ? *raw_nrgb : nrgb_t;
  for (const auto& g : bands) require_same_grid(nrgb_t[0], g, "assemble_stack");

  const RealGrid dem = elevation.transform().same_grid(t) ? elevation : resample_nearest(elevation, t);
  ElevationChannels ec = elevation_channels(dem);

  ChannelStack stack{t, {}};
  stack.channels.reserve(kChannelNames.size());
  for (std::size_t b = 0; b < 4; ++b) stack.channels.push_back({kChannelNames[b], nrgb_t[b]});
  stack.channels.push_back({kChannelNames[4], ndvi(bands[0], bands[1])});
  stack.channels.push_back({kChannelNames[5], ndwi(bands[2], bands[0])});
  stack.channels.push_back({kChannelNames[6], std::move(ec.shifted)});
  stack.channels.push_back({kChannelNames[7], std::move(ec.delta_x)});
  stack.channels.push_back({kChannelNames[8], std::move(ec.delta_y)});
  stack.channels.push_back({kChannelNames[9], std::move(ec.gradient)});
  return stack;
}

}  // namespace waterline
