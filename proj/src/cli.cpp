#include "waterline/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "waterline/ascii_grid.hpp"
#include "waterline/compositing.hpp"
#include "waterline/evaluation.hpp"
#include "waterline/features.hpp"
#include "waterline/labels.hpp"
#include "waterline/parallel.hpp"
#include "waterline/stream_order.hpp"
#include "waterline/thinning.hpp"
#include "waterline/vectorize.hpp"

#ifndef WATERLINE_VERSION
#define WATERLINE_VERSION "0.0.0"
#endif

namespace waterline {

namespace {

namespace fs = std::filesystem;

constexpr int kGraphFormatVersion = 1;
constexpr int kSummaryFormatVersion = 1;

class StageLog {
 public:
  explicit StageLog(std::ostream& err) : err_(err) {}

  void begin() { start_ = std::chrono::steady_clock::now(); }
  void end(const std::string& stage, const std::vector<std::pair<std::string, std::string>>& fields = {}) {
    const auto ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    err_ << "waterline: stage=" << stage << " wall_ms=" << static_cast<long long>(ms + 0.5);
    for (const auto& [k, v] : fields) err_ << ' ' << k << '=' << v;
    err_ << '\n';
  }

 private:
  std::ostream& err_;
  std::chrono::steady_clock::time_point start_;
};

std::string count_of(std::size_t n) { return std::to_string(n); }

std::size_t foreground(const BinaryMask& m) {
  std::size_t n = 0;
  for (auto v : m.cells()) n += v;
  return n;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_output(path);
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

fs::path with_suffix(const std::string& prefix, const std::string& suffix) {
  return fs::path(prefix + "_" + suffix + ".asc");
}

nlohmann::json graph_document(const WaterwayGraph& g, bool ordered) {
  nlohmann::json doc = graph_to_geojson(g);
  nlohmann::json meta = {{"format_version", kGraphFormatVersion}};
  if (ordered) {
    meta["stream_order"] = "modified_strahler";
    meta["order_elevation_sample"] = "segment_endpoints";
  }
  doc["waterline"] = std::move(meta);
  return doc;
}

BBox parse_bbox(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InputError("--bbox: '" + part + "' is not a number");
    }
  }
  if (v.size() != 4) throw InputError("--bbox expects lonmin,latmin,lonmax,latmax");
  return {v[0], v[1], v[2], v[3]};
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InputError(what + ": '" + part + "' is not a number");
    }
  }
  if (v.empty()) throw InputError(what + ": empty list");
  return v;
}

double parse_real(const std::string& text, const std::string& what) {
  const auto v = parse_list(text, what);
  if (v.size() != 1) throw InputError(what + ": expected a single number");
  return v[0];
}

struct EvaluationOutputs {
  DistanceSummary summary;
  std::vector<HitRates> hits;
};

EvaluationOutputs run_evaluation(const WaterwayGraph& candidate, std::vector<Polyline> reference,
                                 const std::vector<double>& thresholds, StageLog& log) {
  log.begin();
  double bucket = 0.0;
  for (double t : thresholds) {
    if (!(t > 0.0)) throw InputError("evaluation thresholds must be positive");
    bucket = std::max(bucket, t);
  }
  const ReferenceIndex index(std::move(reference), bucket);
  const auto points = evaluation_points(candidate);
  if (points.empty()) throw InputError("candidate waterways have no evaluation points");
  const auto dist = nearest_distances(points, index);
  EvaluationOutputs out{distance_summary(points, dist), {}};
  for (double t : thresholds) out.hits.push_back(hit_rate(points, dist, t));
  log.end("evaluate", {{"points", count_of(points.size())},
                       {"reference_segments", count_of(index.segment_count())}});
  return out;
}

void write_summary(const fs::path& path, const DistanceSummary& s) {
  std::ostringstream os;
  write_summary_csv(os, s);
  write_text(path, os.str());
}

void write_hits(const fs::path& path, const std::vector<HitRates>& h) {
  std::ostringstream os;
  write_hit_rates_csv(os, h);
  write_text(path, os.str());
}

// Flat `key = value` config; relative paths resolve against the file's folder.
class Config {
 public:
  static Config load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path.string());
    Config cfg;
    cfg.base_ = path.parent_path();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
      }
      auto trim = [](std::string s) {
        const auto x = s.find_first_not_of(" \t\r");
        const auto y = s.find_last_not_of(" \t\r");
        return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
      };
      cfg.values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  void check_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [k, v] : values_) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        throw InputError("unknown config key '" + k + "'");
      }
    }
  }
  std::optional<std::string> get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<fs::path> path(const std::string& key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    fs::path p(*v);
    return p.is_absolute() ? p : base_ / p;
  }

 private:
  fs::path base_;
  std::map<std::string, std::string> values_;
};

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw InputError("input file not found: " + p.string());
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"waterline: waterway raster post-processing and evaluation"};
  app.require_subcommand(0, 1);
  int jobs = 0;
  app.add_option("--jobs", jobs, "Worker threads (default: all cores)");
  app.set_version_flag("--version",
                       std::string("waterline ") + WATERLINE_VERSION + " (ascii-grid 1, graph-geojson " +
                           std::to_string(kGraphFormatVersion) + ", summary-csv " +
                           std::to_string(kSummaryFormatVersion) + ")");

  StageLog log(err);

  // composite
  auto* composite = app.add_subcommand("composite", "Greedy cloud-free composite from a tile manifest");
  std::string manifest, bbox_text, comp_out;
  double cloud_threshold = 0.01, buffer_m = 500.0;
  std::size_t min_tiles = 1;
  composite->add_option("--manifest", manifest, "Tile manifest (id nir red green blue mask per line)")->required();
  composite->add_option("--bbox", bbox_text, "lonmin,latmin,lonmax,latmax")->required();
  composite->add_option("--threshold", cloud_threshold, "Acceptable uncovered fraction")->capture_default_str();
  composite->add_option("--buffer-m", buffer_m, "Buffer around invalid pixels in metres")->capture_default_str();
  composite->add_option("--min-tiles", min_tiles, "Accept at least this many tiles")->capture_default_str();
  composite->add_option("--out", comp_out, "Output prefix")->required();

  // features
  auto* features = app.add_subcommand("features", "Assemble the 10-channel feature stack");
  std::vector<std::string> nrgb_paths, raw_paths;
  std::string dem_path, feat_out;
  features->add_option("--nrgb", nrgb_paths, "Transformed N R G B grids")->required()->expected(4);
  features->add_option("--raw", raw_paths, "Raw N R G B reflectance for NDVI/NDWI")->expected(4);
  features->add_option("--dem", dem_path, "Elevation grid")->required();
  features->add_option("--out", feat_out, "Output prefix")->required();

  // rasterize-labels
  auto* rasterize = app.add_subcommand("rasterize-labels", "Burn labelled GeoJSON to label/target/weight grids");
  std::string geojson_path, like_path, weights_path, labels_out;
  rasterize->add_option("--geojson", geojson_path, "Features with a water_type property")->required();
  rasterize->add_option("--like", like_path, "Grid whose geometry the output copies")->required();
  rasterize->add_option("--weights", weights_path, "Weight table overrides (name = weight)");
  rasterize->add_option("--out", labels_out, "Output prefix")->required();

  // thin
  auto* thin_cmd = app.add_subcommand("thin", "Elevation-ordered topology-preserving thinning");
  std::string mask_path, thin_dem, thin_out;
  double mask_threshold = 0.5;
  thin_cmd->add_option("--mask", mask_path, "Waterway probability or binary grid")->required();
  thin_cmd->add_option("--dem", thin_dem, "Elevation grid")->required();
  thin_cmd->add_option("--threshold", mask_threshold, "Cells >= threshold are waterway")->capture_default_str();
  thin_cmd->add_option("--out", thin_out, "Skeleton grid")->required();

  // vectorize
  auto* vectorize = app.add_subcommand("vectorize", "Trace a skeleton into a waterway graph");
  std::string skel_path, vec_out;
  vectorize->add_option("--skeleton", skel_path, "Skeleton grid")->required();
  vectorize->add_option("--out", vec_out, "Output GeoJSON")->required();

  // order
  auto* order = app.add_subcommand("order", "Assign modified Strahler stream orders");
  std::string graph_path, order_dem, order_out;
  order->add_option("--graph", graph_path, "Waterway GeoJSON")->required();
  order->add_option("--dem", order_dem, "Elevation grid")->required();
  order->add_option("--out", order_out, "Output GeoJSON")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Distance evaluation against reference waterways");
  std::string candidate_path, reference_path, summary_out, hits_out;
  double eval_threshold = 0.002;
  std::string eval_thresholds;
  evaluate->add_option("--candidate", candidate_path, "Ordered candidate GeoJSON")->required();
  evaluate->add_option("--reference", reference_path, "Reference waterway GeoJSON")->required();
  evaluate->add_option("--threshold", eval_threshold, "Hit threshold in degrees")->capture_default_str();
  evaluate->add_option("--thresholds", eval_thresholds, "Comma list of hit thresholds (overrides --threshold)");
  evaluate->add_option("--summary-out", summary_out, "Distance summary CSV")->required();
  evaluate->add_option("--hits-out", hits_out, "Hit-rate CSV");

  // recall
  auto* recall = app.add_subcommand("recall", "Community request capture per country");
  std::string requests_path, waterways_path, recall_out;
  double recall_threshold = 0.002;
  recall->add_option("--requests", requests_path, "CSV with lon,lat,country[,service]")->required();
  recall->add_option("--waterways", waterways_path, "Waterway GeoJSON")->required();
  recall->add_option("--threshold", recall_threshold, "Capture distance in degrees")->capture_default_str();
  recall->add_option("--out", recall_out, "Write the table here instead of stdout");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "thin -> vectorize -> order -> evaluate from a config file");
  std::string config_path;
  std::map<std::string, std::string> overrides;
  pipeline->add_option("--config", config_path, "Flat key = value config")->required();
  const std::vector<std::string> pipeline_keys = {"mask",        "dem",       "reference",   "mask_threshold",
                                                  "hit_thresholds", "skeleton_out", "graph_out", "summary_out",
                                                  "hits_out"};
  for (const auto& key : pipeline_keys) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    pipeline->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, "Overrides config key " + key);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    set_jobs(jobs);

    if (composite->parsed()) {
      log.begin();
      ManifestTileProvider provider{fs::path(manifest)};
      CompositeOptions opt;
      opt.cloud_threshold = cloud_threshold;
      opt.buffer_m = buffer_m;
      opt.min_tiles = min_tiles;
      const auto res = greedy_composite(provider, parse_bbox(bbox_text), opt);
      for (std::size_t b = 0; b < 4; ++b) {
        RealGrid g = to_real(res.nrgb[b]);
        g.set_nodata(-9999.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (!res.coverage[i]) g[i] = -9999.0;
        }
        write_ascii_grid(with_suffix(comp_out, std::string(1, "NRGB"[b])), g);
      }
      write_ascii_grid(with_suffix(comp_out, "coverage"), res.coverage);
      std::string ids;
      for (const auto& id : res.accepted) ids += (ids.empty() ? "" : ",") + id;
      log.end("composite", {{"tiles", count_of(res.accepted.size())},
                            {"accepted", ids},
                            {"uncovered_fraction", format_double(res.uncovered_fraction)}});
    } else if (features->parsed()) {
      log.begin();
      std::array<RealGrid, 4> nrgb;
      for (std::size_t b = 0; b < 4; ++b) nrgb[b] = read_ascii_grid(fs::path(nrgb_paths[b]));
      std::optional<std::array<RealGrid, 4>> raw;
      if (!raw_paths.empty()) {
        raw.emplace();
        for (std::size_t b = 0; b < 4; ++b) (*raw)[b] = read_ascii_grid(fs::path(raw_paths[b]));
      }
      const auto stack = assemble_stack(nrgb, read_ascii_grid(fs::path(dem_path)), raw);
      for (const auto& ch : stack.channels) write_ascii_grid(with_suffix(feat_out, ch.name), ch.grid);
      log.end("features", {{"channels", count_of(stack.size())}, {"cells", count_of(stack.transform.size())}});
    } else if (rasterize->parsed()) {
      log.begin();
      const auto table = weights_path.empty() ? FcodeWeightTable::defaults()
                                              : FcodeWeightTable::load(fs::path(weights_path));
      const RealGrid like = read_ascii_grid(fs::path(like_path));
      const auto geoms = labeled_geometries(read_features(fs::path(geojson_path)));
      const LabelGrid labels = burn_vectors(geoms, like.transform(), table);
      const auto targets = weights_from_labels(labels, table);
      write_ascii_grid(with_suffix(labels_out, "labels"), labels);
      write_ascii_grid(with_suffix(labels_out, "target"), targets.target);
      write_ascii_grid(with_suffix(labels_out, "weight"), targets.weight);
      log.end("rasterize-labels", {{"geometries", count_of(geoms.size())}});
    } else if (thin_cmd->parsed()) {
      log.begin();
      const BinaryMask mask = binarize(read_ascii_grid(fs::path(mask_path)), mask_threshold);
      ThinStats stats;
      const BinaryMask skel = thin(mask, read_ascii_grid(fs::path(thin_dem)), &stats);
      write_ascii_grid(fs::path(thin_out), skel);
      log.end("thin", {{"cells_in", count_of(foreground(mask))},
                       {"cells_out", count_of(foreground(skel))},
                       {"stuck_interior", count_of(stats.stuck_interior)}});
    } else if (vectorize->parsed()) {
      log.begin();
      const BinaryMask skel = binarize(read_ascii_grid(fs::path(skel_path)), 0.5);
      const auto g = skeleton_to_graph(skel);
      write_json_file(fs::path(vec_out), graph_document(g, false));
      log.end("vectorize", {{"nodes", count_of(g.nodes.size())}, {"segments", count_of(g.segments.size())}});
    } else if (order->parsed()) {
      log.begin();
      const auto g = graph_from_geojson(parse_json_file(fs::path(graph_path)), graph_path);
      const auto ordered = assign_orders(g, read_ascii_grid(fs::path(order_dem)));
      write_json_file(fs::path(order_out), graph_document(ordered, true));
      log.end("order", {{"segments", count_of(ordered.segments.size())}});
    } else if (evaluate->parsed()) {
      const auto candidate = graph_from_geojson(parse_json_file(fs::path(candidate_path)), candidate_path);
      const auto thresholds = eval_thresholds.empty() ? std::vector<double>{eval_threshold}
                                                      : parse_list(eval_thresholds, "--thresholds");
      auto res = run_evaluation(candidate, read_polylines(fs::path(reference_path)), thresholds, log);
      write_summary(fs::path(summary_out), res.summary);
      if (!hits_out.empty()) write_hits(fs::path(hits_out), res.hits);
      write_hit_rates_csv(out, res.hits);
    } else if (recall->parsed()) {
      log.begin();
      const auto requests = read_requests(fs::path(requests_path));
      const auto g = graph_from_geojson(parse_json_file(fs::path(waterways_path)), waterways_path);
      const auto stats = recall_requests(requests, g, recall_threshold);
      std::ostringstream os;
      os << "country,captured,total,recall\n";
      for (const auto& [country, s] : stats) {
        char frac[32];
        std::snprintf(frac, sizeof frac, "%.6f", s.fraction());
        os << country << ',' << s.captured << ',' << s.total << ',' << frac << '\n';
      }
      if (recall_out.empty()) out << os.str();
      else write_text(fs::path(recall_out), os.str());
      log.end("recall", {{"requests", count_of(requests.size())}, {"countries", count_of(stats.size())}});
    } else if (pipeline->parsed()) {
      const Config cfg = Config::load(fs::path(config_path));
      cfg.check_keys(pipeline_keys);
      auto path_of = [&](const std::string& key, bool required) -> std::optional<fs::path> {
        if (auto it = overrides.find(key); it != overrides.end()) return fs::path(it->second);
        auto p = cfg.path(key);
        if (!p && required) throw InputError("pipeline: config key '" + key + "' is required");
        return p;
      };
      auto value_of = [&](const std::string& key, const std::string& fallback) {
        if (auto it = overrides.find(key); it != overrides.end()) return it->second;
        return cfg.get(key).value_or(fallback);
      };

      const fs::path mask_file = *path_of("mask", true);
      const fs::path dem_file = *path_of("dem", true);
      const fs::path ref_file = *path_of("reference", true);
      const fs::path graph_file = *path_of("graph_out", true);
      const fs::path summary_file = *path_of("summary_out", true);
      for (const auto& p : {mask_file, dem_file, ref_file}) require_file(p);
      const double thr = parse_real(value_of("mask_threshold", "0.5"), "mask_threshold");
      const auto thresholds = parse_list(value_of("hit_thresholds", "0.001,0.002"), "hit_thresholds");

      log.begin();
      const RealGrid dem = read_ascii_grid(dem_file);
      const BinaryMask mask = binarize(read_ascii_grid(mask_file), thr);
      ThinStats stats;
      const BinaryMask skel = thin(mask, dem, &stats);
      log.end("thin", {{"cells_in", count_of(foreground(mask))},
                       {"cells_out", count_of(foreground(skel))},
                       {"stuck_interior", count_of(stats.stuck_interior)}});
      if (auto p = path_of("skeleton_out", false)) write_ascii_grid(*p, skel);

      log.begin();
      const auto g = skeleton_to_graph(skel);
      log.end("vectorize", {{"nodes", count_of(g.nodes.size())}, {"segments", count_of(g.segments.size())}});

      log.begin();
      const auto ordered = assign_orders(g, dem);
      write_json_file(graph_file, graph_document(ordered, true));
      log.end("order", {{"segments", count_of(ordered.segments.size())}});

      auto res = run_evaluation(ordered, read_polylines(ref_file), thresholds, log);
      write_summary(summary_file, res.summary);
      if (auto p = path_of("hits_out", false)) write_hits(*p, res.hits);
    }
  } catch (const InputError& e) {
    err << "waterline: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "waterline: internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace waterline
