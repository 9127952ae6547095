#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "waterline/geojson.hpp"
#include "waterline/stream_order.hpp"
#include "waterline/vectorize.hpp"

namespace waterline {

inline constexpr double kMetersPerDegree = 111320.0;

struct Distance {
  double degrees = 0.0;
  double meters = 0.0;
};

/// Planar distance from p to segment [a, b] in degree space.
double point_segment_degrees(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b);
/// Same, after equirectangular scaling about p's latitude.
double point_segment_meters(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b);

/// Minimum over the polyline's segments, computed separately in degrees and
/// in metres. A one-vertex line is treated as a point. Empty lines throw.
Distance point_to_polyline_distance(const GeoPoint& p, const Polyline& line);

/// Uniform bucket grid over reference polylines. Every segment is listed in
/// each bucket its bounding box touches; queries search outward ring by ring
/// and stop once the ring boundary is farther than the best hit so far, so
/// results do not depend on the bucket size.
class ReferenceIndex {
 public:
  ReferenceIndex(std::vector<Polyline> polylines, double bucket_size);

  double nearest_degrees(const GeoPoint& p) const;
  double nearest_meters(const GeoPoint& p) const;
  Distance nearest(const GeoPoint& p) const { return {nearest_degrees(p), nearest_meters(p)}; }

  const std::vector<Polyline>& polylines() const { return polylines_; }
  double bucket_size() const { return bucket_; }
  std::size_t bucket_count() const { return buckets_.size(); }
  std::size_t segment_count() const { return segs_.size(); }

 private:
  struct Seg {
    GeoPoint a;
    GeoPoint b;
  };
  template <typename DistFn>
  double search(const GeoPoint& p, double lon_scale, double lat_scale, DistFn dist) const;

  std::vector<Polyline> polylines_;
  std::vector<Seg> segs_;
  double bucket_ = 0.0;
  double lon0_ = 0.0;
  double lat0_ = 0.0;
  long long nx_ = 0;
  long long ny_ = 0;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

/// Every polyline of the graph, single points included.
std::vector<Polyline> graph_polylines(const WaterwayGraph& g);

struct CategorizedPoint {
  GeoPoint point;
  std::optional<OrderCategory> category;  ///< nullopt: counts only toward "all"
};

/// Inner points of every segment, tagged with the segment's order category.
std::vector<CategorizedPoint> evaluation_points(const WaterwayGraph& g);

/// Nearest reference distance for each point (OpenMP over points).
std::vector<Distance> nearest_distances(const std::vector<CategorizedPoint>& points,
                                        const ReferenceIndex& index);

/// Column order O1, O2, O3plus, all.
inline constexpr std::size_t kColumns = 4;

struct HitRates {
  double threshold = 0.0;
  std::array<std::size_t, kColumns> hits{};
  std::array<std::size_t, kColumns> count{};
  /// NaN for an empty category.
  std::array<double, kColumns> fraction{};
};

/// Fraction of points whose nearest reference lies strictly closer than
/// `threshold` degrees. Throws InputError for no points or threshold <= 0.
HitRates hit_rate(const std::vector<CategorizedPoint>& points, const ReferenceIndex& index,
                  double threshold);
HitRates hit_rate(const std::vector<CategorizedPoint>& points, const std::vector<Distance>& distances,
                  double threshold);

struct RequestPoint {
  GeoPoint point;
  std::string country;
  std::string service;
};

/// CSV with a header naming at least lon, lat and country (service optional).
std::vector<RequestPoint> read_requests(std::istream& in, const std::string& source = "<csv>");
std::vector<RequestPoint> read_requests(const std::filesystem::path& path);

struct RecallStat {
  std::size_t captured = 0;
  std::size_t total = 0;
  double fraction() const { return total ? static_cast<double>(captured) / static_cast<double>(total) : 0.0; }
};

/// A request is captured when any waterway geometry lies strictly within
/// `threshold` degrees. Countries without requests are absent from the map.
std::map<std::string, RecallStat> recall_requests(const std::vector<RequestPoint>& requests,
                                                  const WaterwayGraph& waterways, double threshold = 0.002);

struct ColumnStats {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;  ///< sample standard deviation (n - 1)
  double min = 0.0;
  double max = 0.0;
  /// 5%, 10%, ..., 95%, then 99%.
  std::array<double, 20> quantiles{};
};

/// Distance statistics in metres for stream order columns 1, 2, 3+, all.
struct DistanceSummary {
  std::array<ColumnStats, kColumns> columns;
};

/// Quantile by linear interpolation between order statistics at (n - 1) q.
double quantile_sorted(const std::vector<double>& sorted, double q);
ColumnStats column_stats(std::vector<double> values);

DistanceSummary distance_summary(const std::vector<CategorizedPoint>& points, const ReferenceIndex& index);
DistanceSummary distance_summary(const std::vector<CategorizedPoint>& points,
                                 const std::vector<Distance>& distances);

/// Rows Count, Mean, SD, Min, 5%..95%, 99%, Max; columns 1, 2, 3, all.
/// Values with two decimals; empty columns print NA.
void write_summary_csv(std::ostream& out, const DistanceSummary& summary);
void write_hit_rates_csv(std::ostream& out, const std::vector<HitRates>& rates);

namespace serial {
std::vector<Distance> nearest_distances(const std::vector<CategorizedPoint>& points,
                                        const ReferenceIndex& index);
}  // namespace serial

}  // namespace waterline
