#include "waterline/vectorize.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace waterline {

namespace {

constexpr std::array<std::array<int, 2>, 8> kRing = {
    {{-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}}};

class SkeletonView {
 public:
  explicit SkeletonView(const BinaryMask& m) : m_(m) {}

  bool on(std::ptrdiff_t r, std::ptrdiff_t c) const {
    return m_.transform().contains(r, c) &&
           m_(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) != 0;
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * m_.cols() + static_cast<std::size_t>(c.col);
  }
  Cell cell(std::size_t i) const {
    return {static_cast<std::ptrdiff_t>(i / m_.cols()), static_cast<std::ptrdiff_t>(i % m_.cols())};
  }
  std::vector<std::size_t> adjacent(std::size_t i) const {
    const Cell c = cell(i);
    std::vector<std::size_t> out;
    for (const auto& d : kRing) {
      if (on(c.row + d[0], c.col + d[1])) out.push_back(index({c.row + d[0], c.col + d[1]}));
    }
    return out;
  }
  GeoPoint point(std::size_t i) const {
    const Cell c = cell(i);
    return m_.transform().cell_center(static_cast<std::size_t>(c.row), static_cast<std::size_t>(c.col));
  }

 private:
  const BinaryMask& m_;
};

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

bool north_west_first(const GeoPoint& a, const GeoPoint& b) {
  if (a.lat != b.lat) return a.lat > b.lat;
  return a.lon < b.lon;
}

}  // namespace

WaterwayGraph skeleton_to_graph(const BinaryMask& skel) {
  check_binary(skel);
  const std::size_t rows = skel.rows();
  const std::size_t cols = skel.cols();
  for (std::size_t r = 0; r + 1 < rows; ++r) {
    for (std::size_t c = 0; c + 1 < cols; ++c) {
      if (skel(r, c) && skel(r, c + 1) && skel(r + 1, c) && skel(r + 1, c + 1)) {
        throw InputError("skeleton_to_graph: 2x2 block at row " + std::to_string(r) + ", col " +
                         std::to_string(c) + "; input is not a thinned skeleton");
      }
    }
  }

  const SkeletonView view(skel);
  std::vector<std::uint8_t> degree(skel.size(), 0);
  for (std::size_t i = 0; i < skel.size(); ++i) {
    if (skel[i]) degree[i] = static_cast<std::uint8_t>(view.adjacent(i).size());
  }

  WaterwayGraph g;
  std::map<std::size_t, std::size_t> node_of;  // cell index -> node id
  auto add_node = [&](std::size_t i) {
    auto [it, fresh] = node_of.emplace(i, g.nodes.size());
    if (fresh) g.nodes.push_back({g.nodes.size(), view.point(i), degree[i]});
    return it->second;
  };
  for (std::size_t i = 0; i < skel.size(); ++i) {
    if (skel[i] && degree[i] != 2) add_node(i);
  }

  std::vector<std::uint8_t> visited(skel.size(), 0);
  std::unordered_set<std::uint64_t> used;
  auto emit = [&](const std::vector<std::size_t>& path) {
    Segment s;
    s.id = g.segments.size();
    for (auto i : path) {
      s.points.push_back(view.point(i));
      s.cells.push_back(view.cell(i));
    }
    s.nodes = {node_of.at(path.front()), node_of.at(path.back())};
    g.segments.push_back(std::move(s));
  };
  // Follows degree-2 cells from `start` through `first` until a node cell.
  auto walk = [&](std::size_t start, std::size_t first) {
    std::vector<std::size_t> path{start, first};
    used.insert(edge_key(start, first));
    std::size_t prev = start;
    std::size_t cur = first;
    while (!node_of.count(cur)) {
      visited[cur] = 1;
      std::size_t next = cur;
      for (auto n : view.adjacent(cur)) {
        if (n != prev && !used.count(edge_key(cur, n))) {
          next = n;
          break;
        }
      }
      if (next == cur) break;
      used.insert(edge_key(cur, next));
      path.push_back(next);
      prev = cur;
      cur = next;
    }
    return path;
  };

  // Snapshot: ring anchors added below must not be revisited here.
  std::vector<std::size_t> node_cells;
  for (const auto& [cell, id] : node_of) node_cells.push_back(cell);
  for (std::size_t i : node_cells) {
    if (degree[i] == 0) {
      emit({i});
      continue;
    }
    for (auto n : view.adjacent(i)) {
      if (!used.count(edge_key(i, n))) emit(walk(i, n));
    }
  }

  for (std::size_t i = 0; i < skel.size(); ++i) {
    if (!skel[i] || degree[i] != 2 || visited[i]) continue;
    add_node(i);
    visited[i] = 1;
    emit(walk(i, view.adjacent(i).front()));
  }

  // Ring anchors were appended after the other nodes; restore row-major ids.
  std::vector<std::size_t> order(g.nodes.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return north_west_first(g.nodes[a].point, g.nodes[b].point);
  });
  std::vector<std::size_t> renumber(order.size());
  std::vector<GraphNode> nodes(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    renumber[order[k]] = k;
    nodes[k] = g.nodes[order[k]];
    nodes[k].id = k;
  }
  g.nodes = std::move(nodes);
  for (auto& s : g.segments) s.nodes = {renumber[s.nodes[0]], renumber[s.nodes[1]]};
  return g;
}

std::vector<GeoPoint> inner_points(const Segment& seg) {
  const auto& p = seg.points;
  if (p.size() < 2) return {};
  if (p.size() == 2) return {{0.5 * (p[0].lon + p[1].lon), 0.5 * (p[0].lat + p[1].lat)}};
  if (seg.closed()) return {p.begin(), p.end() - 1};
  return {p.begin() + 1, p.end() - 1};
}

nlohmann::json graph_to_geojson(const WaterwayGraph& g) {
  std::vector<const Segment*> segs;
  for (const auto& s : g.segments) segs.push_back(&s);
  std::sort(segs.begin(), segs.end(), [](const Segment* a, const Segment* b) { return a->id < b->id; });

  nlohmann::json features = nlohmann::json::array();
  for (const Segment* s : segs) {
    nlohmann::json geom;
    if (s->points.size() == 1) {
      geom = {{"type", "Point"}, {"coordinates", {s->points[0].lon, s->points[0].lat}}};
    } else {
      nlohmann::json coords = nlohmann::json::array();
      for (const auto& p : s->points) coords.push_back({p.lon, p.lat});
      geom = {{"type", "LineString"}, {"coordinates", std::move(coords)}};
    }
    features.push_back({{"type", "Feature"},
                        {"properties", {{"segment_id", s->id}, {"stream_order", s->order}}},
                        {"geometry", std::move(geom)}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

WaterwayGraph graph_from_features(const std::vector<Feature>& features) {
  WaterwayGraph g;
  for (const auto& f : features) {
    if (f.kind == GeometryKind::Polygon || f.rings.empty() || f.rings.front().empty()) continue;
    Segment s;
    s.id = g.segments.size();
    if (auto it = f.properties.find("segment_id"); it != f.properties.end() && it->is_number_integer()) {
      s.id = it->get<std::size_t>();
    }
    if (auto it = f.properties.find("stream_order"); it != f.properties.end() && it->is_number_integer()) {
      s.order = it->get<int>();
    }
    s.points = f.rings.front();
    g.segments.push_back(std::move(s));
  }

  std::vector<GeoPoint> ends;
  for (const auto& s : g.segments) {
    ends.push_back(s.points.front());
    ends.push_back(s.points.back());
  }
  std::sort(ends.begin(), ends.end(), north_west_first);
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  for (std::size_t k = 0; k < ends.size(); ++k) g.nodes.push_back({k, ends[k], 0});

  auto find = [&](const GeoPoint& p) {
    const auto it = std::lower_bound(ends.begin(), ends.end(), p, north_west_first);
    return static_cast<std::size_t>(it - ends.begin());
  };
  for (auto& s : g.segments) {
    s.nodes = {find(s.points.front()), find(s.points.back())};
    if (s.points.size() > 1) {
      ++g.nodes[s.nodes[0]].degree;
      ++g.nodes[s.nodes[1]].degree;
    }
  }
  return g;
}

WaterwayGraph graph_from_geojson(const nlohmann::json& doc, const std::string& source) {
  return graph_from_features(parse_features(doc, source));
}

}  // namespace waterline
