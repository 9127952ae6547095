#include "waterline/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "waterline/ascii_grid.hpp"

namespace waterline {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void check_weight(const std::string& name, double w) {
  if (!std::isfinite(w) || w < 0.0) throw InputError("weight for '" + name + "' must be >= 0");
}

// Continuous grid coordinates: x grows with columns, y with rows.
struct GridPoint {
  double x;
  double y;
};

GridPoint to_grid(const GeoTransform& t, const GeoPoint& p) {
  return {(p.lon - t.origin_lon) / t.cell_size, (t.origin_lat - p.lat) / t.cell_size};
}

void mark(LabelGrid& out, long long row, long long col, std::int32_t label) {
  if (out.transform().contains(row, col)) {
    out(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) = label;
  }
}

// Grid traversal that visits every cell the segment passes through, both
// side cells included when it crosses exactly through a cell corner.
void burn_segment(LabelGrid& out, GridPoint a, GridPoint b, std::int32_t label) {
  long long cx = static_cast<long long>(std::floor(a.x));
  long long cy = static_cast<long long>(std::floor(a.y));
  const long long ex = static_cast<long long>(std::floor(b.x));
  const long long ey = static_cast<long long>(std::floor(b.y));
  mark(out, cy, cx, label);

  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double tdx = sx ? 1.0 / std::abs(dx) : inf;
  const double tdy = sy ? 1.0 / std::abs(dy) : inf;
  double tx = sx > 0 ? (static_cast<double>(cx + 1) - a.x) / dx
                     : (sx < 0 ? (a.x - static_cast<double>(cx)) / -dx : inf);
  double ty = sy > 0 ? (static_cast<double>(cy + 1) - a.y) / dy
                     : (sy < 0 ? (a.y - static_cast<double>(cy)) / -dy : inf);

  long long budget = std::llabs(ex - cx) + std::llabs(ey - cy) + 2;
  while ((cx != ex || cy != ey) && budget-- > 0) {
    if (tx < ty) {
      if (tx > 1.0) break;
      cx += sx;
      tx += tdx;
    } else if (ty < tx) {
      if (ty > 1.0) break;
      cy += sy;
      ty += tdy;
    } else {
      if (tx > 1.0) break;
      mark(out, cy, cx + sx, label);
      mark(out, cy + sy, cx, label);
      cx += sx;
      cy += sy;
      tx += tdx;
      ty += tdy;
    }
    mark(out, cy, cx, label);
  }
  mark(out, ey, ex, label);
}

void burn_line(LabelGrid& out, const Polyline& line, std::int32_t label) {
  const auto& t = out.transform();
  if (line.size() == 1) {
    const auto g = to_grid(t, line.front());
    mark(out, static_cast<long long>(std::floor(g.y)), static_cast<long long>(std::floor(g.x)), label);
    return;
  }
  for (std::size_t i = 1; i < line.size(); ++i) {
    burn_segment(out, to_grid(t, line[i - 1]), to_grid(t, line[i]), label);
  }
}

void burn_polygon(LabelGrid& out, const std::vector<Polyline>& rings, std::int32_t label) {
  const auto& t = out.transform();
  std::vector<double> xs;
  for (std::size_t r = 0; r < t.n_rows; ++r) {
    const double y = static_cast<double>(r) + 0.5;
    xs.clear();
    for (const auto& ring : rings) {
      const std::size_t n = ring.size();
      for (std::size_t i = 0; i < n; ++i) {
        const GridPoint a = to_grid(t, ring[i]);
        const GridPoint b = to_grid(t, ring[(i + 1) % n]);
        if ((a.y > y) == (b.y > y)) continue;
        xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    // Centre x is inside when an odd number of crossings lie strictly right of it.
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const double lo = std::max(0.0, std::ceil(xs[k] - 0.5));
      for (double c = lo; c < static_cast<double>(t.n_cols) && c + 0.5 < xs[k + 1]; c += 1.0) {
        out(r, static_cast<std::size_t>(c)) = label;
      }
    }
  }
}

}  // namespace

FcodeWeightTable::FcodeWeightTable(std::vector<std::pair<std::string, double>> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    check_weight(entries_[i].first, entries_[i].second);
    for (std::size_t j = 0; j < i; ++j) {
      if (entries_[j].first == entries_[i].first) {
        throw InputError("duplicate water type '" + entries_[i].first + "'");
      }
    }
  }
}

FcodeWeightTable FcodeWeightTable::defaults() {
  return FcodeWeightTable({
      {"playa", 0.0},
      {"Inundation area", 0.0},
      {"Swamp Intermittent", 0.5},
      {"Swamp Perennial", 0.5},
      {"Swamp", 0.5},
      {"Reservoir", 0.5},
      {"Lake Intermittent", 0.5},
      {"Lake Perennial", 3.25},
      {"Lake", 3.25},
      {"spillway", 0.0},
      {"drainage", 0.5},
      {"wash", 1.5},
      {"canal storm", 0.5},
      {"canal aqua", 0.5},
      {"canal", 0.5},
      {"artificial path", 2.5},
      {"Ephemeral Streams", 3.5},
      {"Intermittent Streams", 3.75},
      {"Perennial Streams", 3.25},
      {"Streams Other", 3.25},
      {"other", 0.5},
  });
}

FcodeWeightTable FcodeWeightTable::parse(std::istream& in, const std::string& source) {
  FcodeWeightTable table = defaults();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.rfind('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw InputError(where + ": expected 'name = weight'");
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (name.empty()) throw InputError(where + ": empty water type name");
    std::size_t used = 0;
    double w = 0.0;
    try {
      w = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw InputError(where + ": bad weight '" + value + "'");
    check_weight(name, w);
    table.set_weight(name, w);
  }
  return table;
}

FcodeWeightTable FcodeWeightTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open weights file: " + path.string());
  return parse(in, path.string());
}

void FcodeWeightTable::write(std::ostream& out) const {
  for (const auto& [name, w] : entries_) out << name << " = " << format_double(w) << '\n';
}

std::int32_t FcodeWeightTable::label_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first == name) return static_cast<std::int32_t>(i + 1);
  }
  throw InputError("unknown water type '" + name + "'");
}

double FcodeWeightTable::weight_of_label(std::int32_t label) const {
  if (label < 1 || static_cast<std::size_t>(label) > entries_.size()) {
    throw InputError("label " + std::to_string(label) + " has no weight table entry");
  }
  return entries_[static_cast<std::size_t>(label - 1)].second;
}

void FcodeWeightTable::set_weight(const std::string& name, double weight) {
  check_weight(name, weight);
  for (auto& e : entries_) {
    if (e.first == name) {
      e.second = weight;
      return;
    }
  }
  entries_.emplace_back(name, weight);
}

LabelGrid burn_vectors(const std::vector<LabeledGeometry>& geometries, const GeoTransform& grid,
                       const FcodeWeightTable& table) {
  LabelGrid out(grid, 0);
  for (const auto& g : geometries) {
    const std::int32_t label = table.label_of(g.type);
    if (g.kind == GeometryKind::Polygon) {
      burn_polygon(out, g.rings, label);
    } else {
      for (const auto& line : g.rings) burn_line(out, line, label);
    }
  }
  return out;
}

LabelGrid burn_vectors(const std::vector<std::pair<Polyline, std::string>>& lines,
                       const std::vector<std::pair<std::vector<Polyline>, std::string>>& polygons,
                       const GeoTransform& grid, const FcodeWeightTable& table) {
  std::vector<LabeledGeometry> all;
  for (const auto& [rings, type] : polygons) all.push_back({GeometryKind::Polygon, rings, type});
  for (const auto& [line, type] : lines) all.push_back({GeometryKind::LineString, {line}, type});
  return burn_vectors(all, grid, table);
}

std::vector<LabeledGeometry> labeled_geometries(const std::vector<Feature>& features) {
  std::vector<LabeledGeometry> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    const auto it = f.properties.find("water_type");
    if (it == f.properties.end() || !it->is_string()) {
      throw InputError("feature is missing a string 'water_type' property");
    }
    out.push_back({f.kind, f.rings, it->get<std::string>()});
  }
  return out;
}

TrainingTargets weights_from_labels(const LabelGrid& labels, const FcodeWeightTable& table) {
  TrainingTargets out{BinaryMask(labels.transform(), std::uint8_t{0}), RealGrid(labels.transform(), 1.0)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::int32_t label = labels[i];
    if (label == 0) continue;
    const double w = table.weight_of_label(label);
    if (w == 0.0) continue;
    if (w < 1.0) {
      out.weight[i] = 0.0;
    } else {
      out.target[i] = 1;
      out.weight[i] = w;
    }
  }
  return out;
}

double weighted_bce(const RealGrid& pred, const BinaryMask& target, const RealGrid& weight) {
  if (!pred.transform().same_grid(target.transform()) ||
      !pred.transform().same_grid(weight.transform())) {
    throw InputError("weighted_bce: grids are not aligned");
  }
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double w = weight[i];
    if (!(w > 0.0)) continue;
    const double p = std::clamp(pred[i], kBceEpsilon, 1.0 - kBceEpsilon);
    total += w * (target[i] ? -std::log(p) : -std::log(1.0 - p));
    ++counted;
  }
  if (counted == 0) throw InputError("weighted_bce: every cell has zero weight");
  return total / static_cast<double>(counted);
}

}  // namespace waterline
