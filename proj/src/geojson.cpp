#include "waterline/geojson.hpp"

#include <fstream>

#include "waterline/ascii_grid.hpp"

namespace waterline {

namespace {

GeoPoint parse_position(const nlohmann::json& pos, const std::string& source) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
    throw InputError(source + ": position must be [lon, lat]");
  }
  GeoPoint p{pos[0].get<double>(), pos[1].get<double>()};
  if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || std::abs(p.lat) > 90.0) {
    throw InputError(source + ": position out of range");
  }
  return p;
}

Polyline parse_line(const nlohmann::json& coords, const std::string& source) {
  if (!coords.is_array()) throw InputError(source + ": coordinates must be an array");
  Polyline line;
  line.reserve(coords.size());
  for (const auto& pos : coords) line.push_back(parse_position(pos, source));
  return line;
}

void append_geometry(const nlohmann::json& geom, const nlohmann::json& props,
                     const std::string& source, std::vector<Feature>& out) {
  if (geom.is_null()) return;
  if (!geom.is_object() || !geom.contains("type")) throw InputError(source + ": geometry without type");
  const std::string type = geom.at("type").get<std::string>();
  if (type == "GeometryCollection") {
    for (const auto& g : geom.at("geometries")) append_geometry(g, props, source, out);
    return;
  }
  const auto& coords = geom.at("coordinates");
  if (type == "Point") {
    out.push_back({GeometryKind::Point, {Polyline{parse_position(coords, source)}}, props});
  } else if (type == "MultiPoint") {
    for (const auto& p : coords) {
      out.push_back({GeometryKind::Point, {Polyline{parse_position(p, source)}}, props});
    }
  } else if (type == "LineString") {
    out.push_back({GeometryKind::LineString, {parse_line(coords, source)}, props});
  } else if (type == "MultiLineString") {
    for (const auto& l : coords) out.push_back({GeometryKind::LineString, {parse_line(l, source)}, props});
  } else if (type == "Polygon") {
    Feature f{GeometryKind::Polygon, {}, props};
    for (const auto& ring : coords) f.rings.push_back(parse_line(ring, source));
    out.push_back(std::move(f));
  } else if (type == "MultiPolygon") {
    for (const auto& poly : coords) {
      Feature f{GeometryKind::Polygon, {}, props};
      for (const auto& ring : poly) f.rings.push_back(parse_line(ring, source));
      out.push_back(std::move(f));
    }
  } else {
    throw InputError(source + ": unsupported geometry type '" + type + "'");
  }
}

}  // namespace

std::vector<Feature> parse_features(const nlohmann::json& doc, const std::string& source) {
  std::vector<Feature> out;
  try {
    const std::string type = doc.at("type").get<std::string>();
    if (type == "FeatureCollection") {
      for (const auto& f : doc.at("features")) {
        const auto props = f.contains("properties") && f["properties"].is_object()
                               ? f["properties"]
                               : nlohmann::json::object();
        append_geometry(f.at("geometry"), props, source, out);
      }
    } else if (type == "Feature") {
      const auto props = doc.value("properties", nlohmann::json::object());
      append_geometry(doc.at("geometry"), props.is_object() ? props : nlohmann::json::object(),
                      source, out);
    } else {
      append_geometry(doc, nlohmann::json::object(), source, out);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(source + ": malformed GeoJSON (" + e.what() + ")");
  }
  return out;
}

nlohmann::json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out = open_output(path);
  out << doc.dump(1) << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

std::vector<Feature> read_features(const std::filesystem::path& path) {
  return parse_features(parse_json_file(path), path.string());
}

std::vector<Polyline> read_polylines(const std::filesystem::path& path) {
  std::vector<Polyline> out;
  for (auto& f : read_features(path)) {
    if (f.kind == GeometryKind::Polygon) continue;
    if (!f.rings.empty() && !f.rings.front().empty()) out.push_back(std::move(f.rings.front()));
  }
  return out;
}

}  // namespace waterline
