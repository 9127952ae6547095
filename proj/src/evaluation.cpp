#include "waterline/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace waterline {

namespace {

constexpr long long kMaxBuckets = 1LL << 22;

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
  return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

double meters_per_degree_lon(const GeoPoint& p) {
  return std::cos(p.lat * std::numbers::pi / 180.0) * kMetersPerDegree;
}

std::size_t column_of(const std::optional<OrderCategory>& c) {
  return c ? static_cast<std::size_t>(*c) : kColumns;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

std::string fixed2(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

double point_segment_degrees(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  return segment_distance(p.lon, p.lat, a.lon, a.lat, b.lon, b.lat);
}

double point_segment_meters(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  const double kx = meters_per_degree_lon(p);
  const double ky = kMetersPerDegree;
  return segment_distance(0.0, 0.0, (a.lon - p.lon) * kx, (a.lat - p.lat) * ky, (b.lon - p.lon) * kx,
                          (b.lat - p.lat) * ky);
}

Distance point_to_polyline_distance(const GeoPoint& p, const Polyline& line) {
  if (line.empty()) throw InputError("point_to_polyline_distance: empty polyline");
  Distance best{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  if (line.size() == 1) {
    return {point_segment_degrees(p, line[0], line[0]), point_segment_meters(p, line[0], line[0])};
  }
  for (std::size_t i = 1; i < line.size(); ++i) {
    best.degrees = std::min(best.degrees, point_segment_degrees(p, line[i - 1], line[i]));
    best.meters = std::min(best.meters, point_segment_meters(p, line[i - 1], line[i]));
  }
  return best;
}

ReferenceIndex::ReferenceIndex(std::vector<Polyline> polylines, double bucket_size)
    : polylines_(std::move(polylines)), bucket_(bucket_size) {
  if (!(bucket_size > 0.0) || !std::isfinite(bucket_size)) {
    throw InputError("reference index bucket size must be positive");
  }
  double lon_min = std::numeric_limits<double>::infinity();
  double lat_min = lon_min;
  double lon_max = -lon_min;
  double lat_max = -lon_min;
  for (const auto& line : polylines_) {
    for (const auto& p : line) {
      lon_min = std::min(lon_min, p.lon);
      lon_max = std::max(lon_max, p.lon);
      lat_min = std::min(lat_min, p.lat);
      lat_max = std::max(lat_max, p.lat);
    }
    if (line.size() == 1) segs_.push_back({line[0], line[0]});
    for (std::size_t i = 1; i < line.size(); ++i) segs_.push_back({line[i - 1], line[i]});
  }
  if (segs_.empty()) throw InputError("reference index is empty");

  lon0_ = lon_min;
  lat0_ = lat_min;
  for (;;) {
    nx_ = static_cast<long long>(std::floor((lon_max - lon0_) / bucket_)) + 1;
    ny_ = static_cast<long long>(std::floor((lat_max - lat0_) / bucket_)) + 1;
    if (nx_ * ny_ <= kMaxBuckets) break;
    bucket_ *= 2.0;
  }
  buckets_.resize(static_cast<std::size_t>(nx_ * ny_));
  auto bx = [&](double lon) {
    return std::clamp(static_cast<long long>(std::floor((lon - lon0_) / bucket_)), 0LL, nx_ - 1);
  };
  auto by = [&](double lat) {
    return std::clamp(static_cast<long long>(std::floor((lat - lat0_) / bucket_)), 0LL, ny_ - 1);
  };
  for (std::size_t k = 0; k < segs_.size(); ++k) {
    const auto& s = segs_[k];
    const long long x0 = bx(std::min(s.a.lon, s.b.lon));
    const long long x1 = bx(std::max(s.a.lon, s.b.lon));
    const long long y0 = by(std::min(s.a.lat, s.b.lat));
    const long long y1 = by(std::max(s.a.lat, s.b.lat));
    for (long long y = y0; y <= y1; ++y) {
      for (long long x = x0; x <= x1; ++x) {
        buckets_[static_cast<std::size_t>(y * nx_ + x)].push_back(static_cast<std::uint32_t>(k));
      }
    }
  }
}

template <typename DistFn>
double ReferenceIndex::search(const GeoPoint& p, double lon_scale, double lat_scale, DistFn dist) const {
  // The scales convert longitude/latitude gaps into the distance's unit, so
  // the ring boundary gives a lower bound on anything not yet visited.
  const double bxf = std::floor((p.lon - lon0_) / bucket_);
  const double byf = std::floor((p.lat - lat0_) / bucket_);
  const auto bx = static_cast<long long>(bxf);
  const auto by = static_cast<long long>(byf);

  double best = std::numeric_limits<double>::infinity();
  const long long k_start = std::max({0LL, bx - (nx_ - 1), -bx, by - (ny_ - 1), -by});
  for (long long k = k_start;; ++k) {
    auto visit = [&](long long x, long long y) {
      if (x < 0 || y < 0 || x >= nx_ || y >= ny_) return;
      for (auto id : buckets_[static_cast<std::size_t>(y * nx_ + x)]) {
        best = std::min(best, dist(segs_[id]));
      }
    };
    for (long long x = bx - k; x <= bx + k; ++x) {
      visit(x, by - k);
      if (k) visit(x, by + k);
    }
    for (long long y = by - k + 1; y <= by + k - 1; ++y) {
      visit(bx - k, y);
      visit(bx + k, y);
    }

    const bool covers_all = bx - k <= 0 && bx + k >= nx_ - 1 && by - k <= 0 && by + k >= ny_ - 1;
    if (covers_all) break;
    const double left = p.lon - (lon0_ + static_cast<double>(bx - k) * bucket_);
    const double right = lon0_ + static_cast<double>(bx + k + 1) * bucket_ - p.lon;
    const double down = p.lat - (lat0_ + static_cast<double>(by - k) * bucket_);
    const double up = lat0_ + static_cast<double>(by + k + 1) * bucket_ - p.lat;
    const double bound = std::min(std::min(left, right) * lon_scale, std::min(down, up) * lat_scale);
    if (best <= bound) break;
  }
  return best;
}

double ReferenceIndex::nearest_degrees(const GeoPoint& p) const {
  return search(p, 1.0, 1.0, [&](const Seg& s) { return point_segment_degrees(p, s.a, s.b); });
}

double ReferenceIndex::nearest_meters(const GeoPoint& p) const {
  return search(p, std::max(meters_per_degree_lon(p), 0.0), kMetersPerDegree,
                [&](const Seg& s) { return point_segment_meters(p, s.a, s.b); });
}

std::vector<Polyline> graph_polylines(const WaterwayGraph& g) {
  std::vector<Polyline> out;
  out.reserve(g.segments.size());
  for (const auto& s : g.segments) {
    if (!s.points.empty()) out.push_back(s.points);
  }
  return out;
}

std::vector<CategorizedPoint> evaluation_points(const WaterwayGraph& g) {
  std::vector<const Segment*> segs;
  for (const auto& s : g.segments) segs.push_back(&s);
  std::sort(segs.begin(), segs.end(), [](const Segment* a, const Segment* b) { return a->id < b->id; });
  std::vector<CategorizedPoint> out;
  for (const Segment* s : segs) {
    std::optional<OrderCategory> cat;
    if (s->order >= 1) cat = order_category(s->order);
    for (const auto& p : inner_points(*s)) out.push_back({p, cat});
  }
  return out;
}

namespace serial {

std::vector<Distance> nearest_distances(const std::vector<CategorizedPoint>& points,
                                        const ReferenceIndex& index) {
  std::vector<Distance> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(index.nearest(p.point));
  return out;
}

}  // namespace serial

std::vector<Distance> nearest_distances(const std::vector<CategorizedPoint>& points,
                                        const ReferenceIndex& index) {
  std::vector<Distance> out(points.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(points.size()); ++i) {
    out[static_cast<std::size_t>(i)] = index.nearest(points[static_cast<std::size_t>(i)].point);
  }
  return out;
}

HitRates hit_rate(const std::vector<CategorizedPoint>& points, const std::vector<Distance>& distances,
                  double threshold) {
  if (points.empty()) throw InputError("hit_rate: no evaluation points");
  if (!(threshold > 0.0)) throw InputError("hit_rate: threshold must be positive");
  if (points.size() != distances.size()) throw InputError("hit_rate: distance count mismatch");
  HitRates h;
  h.threshold = threshold;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const bool hit = distances[i].degrees < threshold;
    const std::size_t col = column_of(points[i].category);
    if (col < kColumns - 1) {
      ++h.count[col];
      h.hits[col] += hit ? 1 : 0;
    }
    ++h.count[kColumns - 1];
    h.hits[kColumns - 1] += hit ? 1 : 0;
  }
  for (std::size_t c = 0; c < kColumns; ++c) {
    h.fraction[c] = h.count[c] ? static_cast<double>(h.hits[c]) / static_cast<double>(h.count[c])
                               : std::numeric_limits<double>::quiet_NaN();
  }
  return h;
}

HitRates hit_rate(const std::vector<CategorizedPoint>& points, const ReferenceIndex& index,
                  double threshold) {
  if (points.empty()) throw InputError("hit_rate: no evaluation points");
  return hit_rate(points, nearest_distances(points, index), threshold);
}

std::vector<RequestPoint> read_requests(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty requests file");
  const auto header = split_csv(line);
  auto col = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto lon_c = col("lon");
  const auto lat_c = col("lat");
  const auto country_c = col("country");
  const auto service_c = col("service");
  if (!lon_c || !lat_c || !country_c) {
    throw InputError(source + ": header must name lon,lat,country columns");
  }

  std::vector<RequestPoint> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv(line);
    const std::string where = source + ":" + std::to_string(lineno);
    const std::size_t need = std::max({*lon_c, *lat_c, *country_c}) + 1;
    if (f.size() < need) throw InputError(where + ": too few fields");
    RequestPoint r;
    try {
      std::size_t used = 0;
      r.point.lon = std::stod(f[*lon_c], &used);
      if (used != f[*lon_c].size()) throw std::invalid_argument("lon");
      r.point.lat = std::stod(f[*lat_c], &used);
      if (used != f[*lat_c].size()) throw std::invalid_argument("lat");
    } catch (const std::exception&) {
      throw InputError(where + ": lon/lat must be numbers");
    }
    if (!std::isfinite(r.point.lon) || !std::isfinite(r.point.lat) || std::abs(r.point.lat) > 90.0) {
      throw InputError(where + ": coordinates out of range");
    }
    r.country = f[*country_c];
    if (service_c && *service_c < f.size()) r.service = f[*service_c];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RequestPoint> read_requests(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open requests file: " + path.string());
  return read_requests(in, path.string());
}

std::map<std::string, RecallStat> recall_requests(const std::vector<RequestPoint>& requests,
                                                  const WaterwayGraph& waterways, double threshold) {
  if (!(threshold > 0.0)) throw InputError("recall threshold must be positive");
  std::map<std::string, RecallStat> out;
  auto lines = graph_polylines(waterways);
  if (lines.empty()) {
    for (const auto& r : requests) ++out[r.country].total;
    return out;
  }
  const ReferenceIndex index(std::move(lines), threshold);
  std::vector<std::uint8_t> hit(requests.size(), 0);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(requests.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    hit[k] = index.nearest_degrees(requests[k].point) < threshold ? 1 : 0;
  }
  for (std::size_t k = 0; k < requests.size(); ++k) {
    auto& s = out[requests[k].country];
    ++s.total;
    s.captured += hit[k];
  }
  return out;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ColumnStats column_stats(std::vector<double> values) {
  ColumnStats s;
  s.count = values.size();
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean = s.sd = s.min = s.max = nan;
    s.quantiles.fill(nan);
    return s;
  }
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.sd = values.size() > 1 ? std::sqrt(sq / static_cast<double>(values.size() - 1))
                           : std::numeric_limits<double>::quiet_NaN();
  s.min = values.front();
  s.max = values.back();
  for (std::size_t k = 0; k < 19; ++k) s.quantiles[k] = quantile_sorted(values, 0.05 * static_cast<double>(k + 1));
  s.quantiles[19] = quantile_sorted(values, 0.99);
  return s;
}

DistanceSummary distance_summary(const std::vector<CategorizedPoint>& points,
                                 const std::vector<Distance>& distances) {
  if (points.empty()) throw InputError("distance_summary: no evaluation points");
  if (points.size() != distances.size()) throw InputError("distance_summary: distance count mismatch");
  std::array<std::vector<double>, kColumns> cols;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t c = column_of(points[i].category);
    if (c < kColumns - 1) cols[c].push_back(distances[i].meters);
    cols[kColumns - 1].push_back(distances[i].meters);
  }
  DistanceSummary out;
  for (std::size_t c = 0; c < kColumns; ++c) out.columns[c] = column_stats(std::move(cols[c]));
  return out;
}

DistanceSummary distance_summary(const std::vector<CategorizedPoint>& points, const ReferenceIndex& index) {
  if (points.empty()) throw InputError("distance_summary: no evaluation points");
  return distance_summary(points, nearest_distances(points, index));
}

void write_summary_csv(std::ostream& out, const DistanceSummary& s) {
  out << "Stream Order,1,2,3,all\n";
  auto row = [&](const std::string& label, auto value) {
    out << label;
    for (const auto& c : s.columns) out << ',' << value(c);
    out << '\n';
  };
  row("Count", [](const ColumnStats& c) { return std::to_string(c.count); });
  row("Mean", [](const ColumnStats& c) { return fixed2(c.mean); });
  row("SD", [](const ColumnStats& c) { return fixed2(c.sd); });
  row("Min", [](const ColumnStats& c) { return fixed2(c.min); });
  for (std::size_t k = 0; k < 19; ++k) {
    row(std::to_string(5 * (k + 1)) + "%", [k](const ColumnStats& c) { return fixed2(c.quantiles[k]); });
  }
  row("99%", [](const ColumnStats& c) { return fixed2(c.quantiles[19]); });
  row("Max", [](const ColumnStats& c) { return fixed2(c.max); });
}

void write_hit_rates_csv(std::ostream& out, const std::vector<HitRates>& rates) {
  static constexpr std::array<const char*, kColumns> kNames = {"1", "2", "3", "all"};
  out << "threshold_deg,stream_order,hits,count,fraction\n";
  for (const auto& h : rates) {
    for (std::size_t c = 0; c < kColumns; ++c) {
      char frac[64];
      if (std::isnan(h.fraction[c])) {
        std::snprintf(frac, sizeof frac, "NA");
      } else {
        std::snprintf(frac, sizeof frac, "%.6f", h.fraction[c]);
      }
      char thr[64];
      std::snprintf(thr, sizeof thr, "%g", h.threshold);
      out << thr << ',' << kNames[c] << ',' << h.hits[c] << ',' << h.count[c] << ',' << frac << '\n';
    }
  }
}

}  // namespace waterline
