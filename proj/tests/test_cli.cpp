#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "waterline/ascii_grid.hpp"
#include "waterline/cli.hpp"
#include "waterline/features.hpp"
#include "waterline/geojson.hpp"

namespace fs = std::filesystem;
using namespace waterline;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "waterline");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

struct Workdir {
  fs::path dir;
  explicit Workdir(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workdir() { fs::remove_all(dir); }
  std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

// A small blobby mask with a DEM sloping to the south-east and a reference
// line along the blob.
void write_inputs(const Workdir& w) {
  std::mt19937_64 rng(41);
  const GeoTransform t(10.0, 1.0, 0.001, 30, 30);
  RealGrid mask(t, 0.0, -9999.0);
  RealGrid dem(t, 0.0, -9999.0);
  for (std::size_t r = 0; r < 30; ++r) {
    for (std::size_t c = 0; c < 30; ++c) {
      dem(r, c) = 100.0 - static_cast<double>(r + c) + std::uniform_real_distribution<double>(0, 0.5)(rng);
      const bool river = (r >= 13 && r <= 15) || (c >= 8 && c <= 9 && r < 15) || (r + c >= 40 && r + c <= 41 && r > 14);
      mask(r, c) = river ? 0.9 : 0.1;
    }
  }
  write_ascii_grid(fs::path(w / "mask.asc"), mask);
  write_ascii_grid(fs::path(w / "dem.asc"), dem);
  nlohmann::json ref = {{"type", "FeatureCollection"},
                        {"features",
                         {{{"type", "Feature"},
                           {"properties", nlohmann::json::object()},
                           {"geometry",
                            {{"type", "LineString"}, {"coordinates", {{10.0, 0.9855}, {10.03, 0.9855}}}}}}}}};
  write_json_file(fs::path(w / "ref.geojson"), ref);
  spit(w / "run.cfg",
       "# test config\nmask = mask.asc\ndem = dem.asc\nreference = ref.geojson\n"
       "graph_out = graph.geojson\nsummary_out = summary.csv\nhits_out = hits.csv\nskeleton_out = skel.asc\n");
  spit(w / "requests.csv", "lon,lat,country\n10.01,0.9855,A\n10.5,0.5,A\n10.02,0.9856,B\n");
}

}  // namespace

TEST_CASE("help and version") {
  for (const char* sub : {"composite", "features", "rasterize-labels", "thin", "vectorize", "order", "evaluate",
                          "recall", "pipeline"}) {
    const Run r = run({sub, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Usage") != std::string::npos);
  }
  const Run v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find("waterline 1.0.0") != std::string::npos);
}

TEST_CASE("input errors exit 1") {
  const Run unknown = run({"thin", "--bogus"});
  CHECK(unknown.code == 1);
  const Run missing = run({"thin", "--mask", "/nonexistent/m.asc", "--dem", "/nonexistent/d.asc", "--out", "x.asc"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("/nonexistent/m.asc") != std::string::npos);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);
  CHECK(run({"frobnicate"}).code == 1);

  Workdir w("waterline_cli_errors");
  spit(w / "bad.asc", "ncols 2\nnrows 2\n1 2 3 4\n");
  const Run bad = run({"vectorize", "--skeleton", w / "bad.asc", "--out", w / "g.geojson"});
  CHECK(bad.code == 1);
  spit(w / "bad.cfg", "mask = a\nwhatever = 1\n");
  CHECK(run({"pipeline", "--config", w / "bad.cfg"}).code == 1);
}

TEST_CASE("stage commands chain and are deterministic") {
  Workdir w("waterline_cli_chain");
  write_inputs(w);
  REQUIRE(run({"thin", "--mask", w / "mask.asc", "--dem", w / "dem.asc", "--out", w / "skel.asc"}).code == 0);
  const Run vec = run({"vectorize", "--skeleton", w / "skel.asc", "--out", w / "graph.geojson"});
  REQUIRE(vec.code == 0);
  CHECK(vec.err.find("stage=vectorize") != std::string::npos);
  REQUIRE(run({"order", "--graph", w / "graph.geojson", "--dem", w / "dem.asc", "--out", w / "ordered.geojson"}).code ==
          0);
  const auto doc = parse_json_file(fs::path(w / "ordered.geojson"));
  CHECK(doc["waterline"]["order_elevation_sample"] == "segment_endpoints");
  for (const auto& f : doc["features"]) CHECK(f["properties"]["stream_order"].get<int>() >= 1);

  const Run ev = run({"evaluate", "--candidate", w / "ordered.geojson", "--reference", w / "ref.geojson",
                      "--thresholds", "0.001,0.002", "--summary-out", w / "summary.csv", "--hits-out", w / "hits.csv"});
  REQUIRE(ev.code == 0);
  CHECK(ev.out.rfind("threshold_deg,stream_order,hits,count,fraction\n", 0) == 0);
  CHECK(slurp(w / "summary.csv").rfind("Stream Order,1,2,3,all\n", 0) == 0);

  const Run rc = run({"recall", "--requests", w / "requests.csv", "--waterways", w / "ordered.geojson"});
  REQUIRE(rc.code == 0);
  CHECK(rc.out.rfind("country,captured,total,recall\n", 0) == 0);

  SUBCASE("pipeline equals the chained stages and ignores --jobs") {
    const std::string chained_graph = slurp(w / "ordered.geojson");
    const std::string chained_summary = slurp(w / "summary.csv");
    const std::string chained_hits = slurp(w / "hits.csv");
    for (const char* jobs : {"1", "3"}) {
      const Run p = run({"--jobs", jobs, "pipeline", "--config", w / "run.cfg"});
      REQUIRE(p.code == 0);
      CHECK(slurp(w / "graph.geojson") == chained_graph);
      CHECK(slurp(w / "summary.csv") == chained_summary);
      CHECK(slurp(w / "hits.csv") == chained_hits);
    }
    const Run o = run({"pipeline", "--config", w / "run.cfg", "--graph-out", w / "other.geojson"});
    REQUIRE(o.code == 0);
    CHECK(slurp(w / "other.geojson") == chained_graph);
  }
}

TEST_CASE("rasterize-labels, features and composite") {
  Workdir w("waterline_cli_misc");
  const GeoTransform t(0.0, 0.004, 0.001, 4, 4);
  std::mt19937_64 rng(3);
  RealGrid like(t, 0.0, -9999.0);
  for (auto& v : like.cells()) v = std::uniform_real_distribution<double>(0, 1)(rng);
  write_ascii_grid(fs::path(w / "like.asc"), like);
  nlohmann::json doc = {{"type", "FeatureCollection"},
                        {"features",
                         {{{"type", "Feature"},
                           {"properties", {{"water_type", "Perennial Streams"}}},
                           {"geometry", {{"type", "LineString"}, {"coordinates", {{0.0005, 0.0025}, {0.0035, 0.0025}}}}}}}}};
  write_json_file(fs::path(w / "lines.geojson"), doc);
  REQUIRE(run({"rasterize-labels", "--geojson", w / "lines.geojson", "--like", w / "like.asc", "--out", w / "lab"}).code ==
          0);
  const RealGrid weight = read_ascii_grid(fs::path(w / "lab_weight.asc"));
  CHECK(weight(1, 0) == 3.25);
  CHECK(weight(0, 0) == 1.0);

  const std::vector<std::string> bands = {"n", "r", "g", "b"};
  std::vector<std::string> args = {"features", "--nrgb"};
  for (const auto& b : bands) {
    write_ascii_grid(fs::path(w / (b + ".asc")), like);
    args.push_back(w / (b + ".asc"));
  }
  for (const std::string& a : std::vector<std::string>{"--dem", w / "like.asc", "--out", w / "feat"}) args.push_back(a);
  REQUIRE(run(args).code == 0);
  for (const char* name : kChannelNames) CHECK(fs::exists(w / (std::string("feat_") + name + ".asc")));

  BinaryMask clear(t, std::uint8_t{0});
  write_ascii_grid(fs::path(w / "m.asc"), clear);
  spit(w / "tiles.txt", "t1 n.asc r.asc g.asc b.asc m.asc\n");
  const Run c = run({"composite", "--manifest", w / "tiles.txt", "--bbox", "0,0,0.004,0.004", "--out", w / "comp"});
  REQUIRE(c.code == 0);
  CHECK(c.err.find("uncovered_fraction=0") != std::string::npos);
  const RealGrid cov = read_ascii_grid(fs::path(w / "comp_coverage.asc"));
  for (double v : cov.cells()) CHECK(v == 1.0);
}
