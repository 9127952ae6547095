#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>

#include "waterline/raster.hpp"

namespace waterline {

/// ESRI ASCII Grid reader. Header keys are case-insensitive; both
/// xllcorner/yllcorner and xllcenter/yllcenter are accepted. A missing
/// NODATA_value leaves the grid without a nodata sentinel.
RealGrid read_ascii_grid(std::istream& in, const std::string& source_name = "<stream>");
RealGrid read_ascii_grid(const std::filesystem::path& path);

/// Writes the six-line header (ncols, nrows, xllcorner, yllcorner, cellsize,
/// NODATA_value) then rows north to south. Reals use the shortest decimal that
/// round-trips. Grids without a nodata value are written with -9999.
template <typename T>
void write_ascii_grid(std::ostream& out, const GeoGrid<T>& grid);
template <typename T>
void write_ascii_grid(const std::filesystem::path& path, const GeoGrid<T>& grid);

/// Opens a file for binary writing, creating missing parent directories.
std::ofstream open_output(const std::filesystem::path& path);

/// Shortest round-trip decimal text for a double ("0.5", "1e-07", "-3").
std::string format_double(double v);

/// Cells >= threshold become 1; nodata and lower values become 0.
BinaryMask binarize(const RealGrid& grid, double threshold);

template <typename T>
RealGrid to_real(const GeoGrid<T>& grid) {
  std::vector<double> cells(grid.cells().begin(), grid.cells().end());
  std::optional<double> nd;
  if (grid.nodata()) nd = static_cast<double>(*grid.nodata());
  return RealGrid(grid.transform(), std::move(cells), nd);
}

}  // namespace waterline
