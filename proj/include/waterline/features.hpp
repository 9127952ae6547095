#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "waterline/raster.hpp"

namespace waterline {

/// Logistic squash of a z-scored reflectance into a byte:
/// round(255 / (1 + exp(-0.6 x))), halves rounded away from zero.
std::uint8_t sigmoid_transform(double x);

/// Z-score over valid cells (population SD). Nodata cells are kept as nodata.
/// Throws InputError for fewer than two valid cells or zero spread.
RealGrid normalize_channel(const RealGrid& values);

/// (NIR - Red) / (NIR + Red); zero denominator gives 0.
RealGrid ndvi(const RealGrid& nir, const RealGrid& red);
/// McFeeters water index (Green - NIR) / (Green + NIR); zero denominator gives 0.
RealGrid ndwi(const RealGrid& green, const RealGrid& nir);

struct ElevationChannels {
  RealGrid shifted;   ///< E minus its minimum over valid cells
  RealGrid delta_x;   ///< d/dcol, central inside, one-sided on borders
  RealGrid delta_y;   ///< d/drow (row index grows southward)
  RealGrid gradient;  ///< hypot(delta_x, delta_y)
};

/// Requires at least 2 rows and 2 columns. Differences are per grid cell with
/// no metric scaling. A neighbour that is nodata is skipped in favour of the
/// one-sided difference; with no valid neighbour on an axis the delta is 0.
ElevationChannels elevation_channels(const RealGrid& elevation);

/// Nearest-neighbour resample of `src` onto `target`. Throws InputError when
/// any target cell centre falls outside `src`.
RealGrid resample_nearest(const RealGrid& src, const GeoTransform& target);

struct NamedChannel {
  std::string name;
  RealGrid grid;
};

/// The 10-channel model input, in canonical order:
/// N_t, R_t, G_t, B_t, NDVI, NDWI, E_S, dxE, dyE, gradE.
struct ChannelStack {
  GeoTransform transform;
  std::vector<NamedChannel> channels;

  const RealGrid& operator[](std::size_t i) const { return channels.at(i).grid; }
  std::size_t size() const { return channels.size(); }
};

inline constexpr std::array<const char*, 10> kChannelNames = {
    "N_t", "R_t", "G_t", "B_t", "NDVI", "NDWI", "E_S", "dxE", "dyE", "gradE"};

/// Builds the stack from transformed NRGB bytes and a DEM. Spectral indices are
/// computed from `raw_nrgb` (reflectance) when given, otherwise from the
/// transformed bands. The DEM is resampled onto the imagery grid.
ChannelStack assemble_stack(const std::array<RealGrid, 4>& nrgb_t, const RealGrid& elevation,
                            const std::optional<std::array<RealGrid, 4>>& raw_nrgb = std::nullopt);

/// Serial reference kernels, kept for equivalence tests and benchmarks.
namespace serial {
RealGrid normalize_channel(const RealGrid& values);
ElevationChannels elevation_channels(const RealGrid& elevation);
RealGrid ndvi(const RealGrid& nir, const RealGrid& red);
}  // namespace serial

}  // namespace waterline
