#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "waterline/raster.hpp"

namespace waterline {

struct BBox {
  double lon_min = 0.0;
  double lat_min = 0.0;
  double lon_max = 0.0;
  double lat_max = 0.0;
};

/// One candidate scene: N, R, G, B reflectance plus the scene-classification
/// invalid mask (1 = cloud, cloud shadow or missing).
struct SceneTile {
  std::string id;
  std::array<RealGrid, 4> channels;
  BinaryMask invalid;

  const GeoTransform& transform() const { return invalid.transform(); }
};

/// Throws InputError unless channels and mask share one grid and the mask is binary.
void validate_tile(const SceneTile& tile);

double cloud_fraction(const SceneTile& tile);
double cloud_fraction(const BinaryMask& invalid);

struct TileSummary {
  std::string id;
  double cloud_fraction = 0.0;
};

/// Source of candidate scenes. `enumerate` lists tiles intersecting the box in
/// ascending cloud fraction.
class TileProvider {
 public:
  virtual ~TileProvider() = default;
  virtual std::vector<TileSummary> enumerate(const BBox& bbox) = 0;
  virtual SceneTile fetch(const std::string& id) = 0;
};

/// Holds tiles in memory; enumeration is stable-sorted by cloud fraction.
class InMemoryTileProvider : public TileProvider {
 public:
  explicit InMemoryTileProvider(std::vector<SceneTile> tiles);
  std::vector<TileSummary> enumerate(const BBox& bbox) override;
  SceneTile fetch(const std::string& id) override;

 private:
  std::vector<SceneTile> tiles_;
};

/// Directory-backed mock of a scene catalogue. Each non-comment manifest line
/// is `id nir red green blue mask`, paths relative to the manifest's folder.
class ManifestTileProvider : public TileProvider {
 public:
  explicit ManifestTileProvider(const std::filesystem::path& manifest);
  std::vector<TileSummary> enumerate(const BBox& bbox) override;
  SceneTile fetch(const std::string& id) override;

 private:
  struct Entry {
    std::string id;
    std::array<std::filesystem::path, 5> paths;
  };
  const Entry& entry(const std::string& id) const;
  SceneTile load(const Entry& e) const;

  std::vector<Entry> entries_;
  std::map<std::string, SceneTile> cache_;
};

/// Dilates {mask = 1} by an elliptical structuring element whose semi-axes are
/// ceil(radius_m / cell height) rows and ceil(radius_m / cell width) columns,
/// with cell sizes taken at the grid's central latitude (111,320 m per degree,
/// longitude scaled by cos(lat)). Radius 0 returns the mask unchanged.
BinaryMask buffer_invalid(const BinaryMask& mask, double radius_m);

/// Row and column dilation radii buffer_invalid uses for this grid.
struct BufferRadius {
  std::size_t rows = 0;
  std::size_t cols = 0;
};
BufferRadius buffer_radius_cells(const GeoTransform& t, double radius_m);

struct CompositeOptions {
  double cloud_threshold = 0.01;
  double buffer_m = 500.0;
  /// Keep accepting until at least this many tiles are in the composite.
  std::size_t min_tiles = 1;
  /// Called for every (tile cell -> output cell) contribution; test hook.
  std::function<void(const std::string& tile_id, Cell tile_cell, Cell out_cell)> on_contribution;
};

struct CompositeResult {
  std::array<GeoGrid<std::uint8_t>, 4> nrgb;  ///< 0 where uncovered
  BinaryMask coverage;                        ///< 1 = at least one observation
  std::vector<std::string> accepted;          ///< in acceptance order
  double uncovered_fraction = 1.0;
};

/// Greedy cloud-free compositing. Each step accepts the candidate that leaves
/// the fewest uncovered output cells (ties go to the earlier, less cloudy
/// candidate) and stops once the uncovered fraction is at or below the
/// threshold, no candidate adds coverage, or candidates run out. Each tile is
/// z-scored per channel over its own valid cells, squashed with
/// sigmoid_transform, and contributes only cells outside its buffered invalid
/// mask. Output cells hold the rounded mean of the contributions.
CompositeResult greedy_composite(TileProvider& provider, const BBox& bbox,
                                 const CompositeOptions& options = {});

namespace serial {
BinaryMask buffer_invalid(const BinaryMask& mask, double radius_m);
}

}  // namespace waterline
