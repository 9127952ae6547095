#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "waterline/geojson.hpp"
#include "waterline/raster.hpp"

namespace waterline {

/// Ordered water(way) type -> training weight. Label k (1-based) is the k-th
/// entry. Weight 0 marks a negative class, (0, 1) a masked class, and >= 1 a
/// positive class whose loss is scaled by the weight.
class FcodeWeightTable {
 public:
  FcodeWeightTable() = default;
  explicit FcodeWeightTable(std::vector<std::pair<std::string, double>> entries);

  /// The NHD fcode weights used for training the waterway model.
  static FcodeWeightTable defaults();

  /// Defaults overridden by `name = weight` lines from a config file. Unknown
  /// names are appended. Blank lines and `#` comments are ignored.
  static FcodeWeightTable load(const std::filesystem::path& path);
  static FcodeWeightTable parse(std::istream& in, const std::string& source = "<weights>");
  void write(std::ostream& out) const;

  const std::vector<std::pair<std::string, double>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  /// 1-based label for a type name; throws InputError for unknown names.
  std::int32_t label_of(const std::string& name) const;
  double weight_of_label(std::int32_t label) const;
  void set_weight(const std::string& name, double weight);

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

struct LabeledGeometry {
  GeometryKind kind = GeometryKind::LineString;
  std::vector<Polyline> rings;  ///< one line, or polygon outer ring plus holes
  std::string type;
};

/// Rasterises geometries in list order; later geometries overwrite earlier
/// ones. Polygons fill cells whose centres pass the even-odd test over all
/// rings; lines mark every cell the segment touches (supercover).
LabelGrid burn_vectors(const std::vector<LabeledGeometry>& geometries, const GeoTransform& grid,
                       const FcodeWeightTable& table);

/// Convenience form: polygons are burned first, then lines on top.
LabelGrid burn_vectors(const std::vector<std::pair<Polyline, std::string>>& lines,
                       const std::vector<std::pair<std::vector<Polyline>, std::string>>& polygons,
                       const GeoTransform& grid, const FcodeWeightTable& table);

/// Feature type is read from the `water_type` property.
std::vector<LabeledGeometry> labeled_geometries(const std::vector<Feature>& features);

struct TrainingTargets {
  BinaryMask target;
  RealGrid weight;
};

TrainingTargets weights_from_labels(const LabelGrid& labels, const FcodeWeightTable& table);

inline constexpr double kBceEpsilon = 1e-7;

/// Weighted binary cross-entropy averaged over cells with weight > 0.
/// Predictions are clamped to [1e-7, 1 - 1e-7]. Zero-weight cells are skipped
/// entirely. Throws InputError if every weight is zero.
double weighted_bce(const RealGrid& pred, const BinaryMask& target, const RealGrid& weight);

}  // namespace waterline
