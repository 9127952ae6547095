#include "waterline/stream_order.hpp"

#include <algorithm>
#include <numeric>

namespace waterline {

namespace {

double sample(const RealGrid& e, const GeoPoint& p) {
  const auto cell = geo_to_pixel(e.transform(), p.lon, p.lat);
  if (!cell) {
    throw InputError("no elevation under segment endpoint (" + std::to_string(p.lon) + ", " +
                     std::to_string(p.lat) + ")");
  }
  const auto i = static_cast<std::size_t>(cell->row) * e.cols() + static_cast<std::size_t>(cell->col);
  if (e.is_nodata(i)) {
    throw InputError("elevation is nodata under segment endpoint (" + std::to_string(p.lon) + ", " +
                     std::to_string(p.lat) + ")");
  }
  return e[i];
}

bool point_less(const GeoPoint& a, const GeoPoint& b) {
  if (a.lat != b.lat) return a.lat > b.lat;
  return a.lon < b.lon;
}

// Direction-independent geometry key.
std::vector<GeoPoint> canonical(const Segment& s) {
  std::vector<GeoPoint> pts = s.points;
  std::vector<GeoPoint> rev(pts.rbegin(), pts.rend());
  if (std::lexicographical_compare(rev.begin(), rev.end(), pts.begin(), pts.end(), point_less)) {
    return rev;
  }
  return pts;
}

}  // namespace

WaterwayGraph assign_orders(const WaterwayGraph& graph, const RealGrid& elevation, OrderTrace* trace) {
  WaterwayGraph g = graph;
  const std::size_t n = g.segments.size();

  std::vector<double> node_elev(g.nodes.size());
  for (const auto& node : g.nodes) {
    if (node.id >= g.nodes.size()) throw InputError("graph node ids must be 0..n-1");
    node_elev[node.id] = sample(elevation, node.point);
  }

  std::vector<std::vector<std::size_t>> incident(g.nodes.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = g.segments[k];
    if (s.points.size() < 2) continue;
    incident.at(s.nodes[0]).push_back(k);
    if (s.nodes[1] != s.nodes[0]) incident.at(s.nodes[1]).push_back(k);
  }

  struct Key {
    double hi;
    double lo;
    std::vector<GeoPoint> geom;
  };
  std::vector<Key> keys(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = g.segments[k];
    const double a = node_elev[s.nodes[0]];
    const double b = node_elev[s.nodes[1]];
    keys[k] = {std::max(a, b), std::min(a, b), canonical(s)};
  }
  std::vector<std::size_t> visit(n);
  std::iota(visit.begin(), visit.end(), 0);
  std::sort(visit.begin(), visit.end(), [&](std::size_t x, std::size_t y) {
    if (keys[x].hi != keys[y].hi) return keys[x].hi > keys[y].hi;
    if (keys[x].lo != keys[y].lo) return keys[x].lo > keys[y].lo;
    return std::lexicographical_compare(keys[x].geom.begin(), keys[x].geom.end(), keys[y].geom.begin(),
                                        keys[y].geom.end(), point_less);
  });

  std::vector<int> merged(n, 0);
  std::vector<std::vector<std::size_t>> tribs(n);
  for (std::size_t k : visit) {
    const auto& s = g.segments[k];
    const std::size_t a = s.nodes[0];
    const std::size_t b = s.nodes[1];
    std::vector<std::size_t> up;
    if (node_elev[a] >= node_elev[b]) up.push_back(a);
    if (node_elev[b] >= node_elev[a] && b != a) up.push_back(b);

    int best = 0;
    int ties = 0;
    for (std::size_t node : up) {
      if (s.points.size() < 2) break;
      for (std::size_t t : incident[node]) {
        if (t == k || merged[t] == 0) continue;
        if (std::find(tribs[k].begin(), tribs[k].end(), t) != tribs[k].end()) continue;
        tribs[k].push_back(t);
        if (merged[t] > best) {
          best = merged[t];
          ties = 1;
        } else if (merged[t] == best) {
          ++ties;
        }
      }
    }
    merged[k] = best == 0 ? 1 : (ties >= 2 ? best + 1 : best);
  }

  for (std::size_t k = 0; k < n; ++k) {
    auto& s = g.segments[k];
    const bool both_connected = s.points.size() >= 2 && g.nodes[s.nodes[0]].degree >= 2 &&
                                g.nodes[s.nodes[1]].degree >= 2;
    s.order = both_connected ? std::max(2, merged[k]) : merged[k];
  }

  if (trace) {
    trace->merged_order = std::move(merged);
    for (auto& t : tribs) std::sort(t.begin(), t.end());
    trace->tributaries = std::move(tribs);
    trace->visit_order = std::move(visit);
  }
  return g;
}

OrderCategory order_category(int order) {
  if (order < 1) throw InputError("stream order must be >= 1, got " + std::to_string(order));
  if (order == 1) return OrderCategory::O1;
  if (order == 2) return OrderCategory::O2;
  return OrderCategory::O3plus;
}

std::string category_name(OrderCategory c) {
  switch (c) {
    case OrderCategory::O1: return "O1";
    case OrderCategory::O2: return "O2";
    case OrderCategory::O3plus: return "O3plus";
  }
  return "?";
}

}  // namespace waterline
