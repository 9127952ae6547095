#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "waterline/raster.hpp"

namespace waterline {

using Polyline = std::vector<GeoPoint>;

enum class GeometryKind { Point, LineString, Polygon };

/// A single-part feature. Multi* geometries are split into one feature per
/// part, each carrying the original properties.
struct Feature {
  GeometryKind kind = GeometryKind::LineString;
  /// Point/LineString: one entry. Polygon: outer ring then holes.
  std::vector<Polyline> rings;
  nlohmann::json properties = nlohmann::json::object();
};

std::vector<Feature> parse_features(const nlohmann::json& doc, const std::string& source = "<json>");
std::vector<Feature> read_features(const std::filesystem::path& path);

/// All line work in a document (LineString parts and Point features as
/// one-vertex lines), in document order.
std::vector<Polyline> read_polylines(const std::filesystem::path& path);

nlohmann::json parse_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace waterline
