#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <json.hpp>

#include "waterline/geojson.hpp"
#include "waterline/raster.hpp"

namespace waterline {

struct GraphNode {
  std::size_t id = 0;
  GeoPoint point;
  /// Number of segment ends meeting here (equals the skeleton degree).
  std::size_t degree = 0;
};

struct Segment {
  std::size_t id = 0;
  /// Cell midpoints; a closed segment repeats its anchor at both ends and an
  /// isolated cell is a single point.
  std::vector<GeoPoint> points;
  int order = -1;  ///< -1 until stream orders are assigned
  std::array<std::size_t, 2> nodes{};
  /// Source cells, when built from a skeleton.
  std::vector<Cell> cells;

  bool closed() const { return points.size() > 2 && points.front() == points.back(); }
};

struct WaterwayGraph {
  std::vector<GraphNode> nodes;
  std::vector<Segment> segments;
};

/// Traces a 1-cell-wide skeleton (8-adjacency) into maximal segments between
/// cells whose degree is not 2. Junction-free cycles become one closed segment
/// anchored at their first cell in row-major order. Node ids follow row-major
/// cell order; segment ids follow tracing order. Throws InputError if the
/// mask contains a 2x2 block.
WaterwayGraph skeleton_to_graph(const BinaryMask& skeleton);

/// Evaluation points of a segment: all vertices but the first and last; the
/// midpoint for a two-point segment; every distinct vertex of a closed
/// segment; nothing for a single point.
std::vector<GeoPoint> inner_points(const Segment& segment);

/// FeatureCollection of LineString (Point for isolated cells) features with
/// properties {segment_id, stream_order}, ordered by segment id.
nlohmann::json graph_to_geojson(const WaterwayGraph& graph);

/// Rebuilds a graph from graph_to_geojson output (or any line GeoJSON). Nodes
/// are the distinct segment endpoints, numbered north to south then west to east.
WaterwayGraph graph_from_geojson(const nlohmann::json& doc, const std::string& source = "<geojson>");
WaterwayGraph graph_from_features(const std::vector<Feature>& features);

}  // namespace waterline
