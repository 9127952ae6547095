#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "waterline/ascii_grid.hpp"
#include "waterline/compositing.hpp"
#include "waterline/features.hpp"

using namespace waterline;

namespace {

SceneTile make_tile(const std::string& id, const GeoTransform& t, std::mt19937_64& rng,
                    const std::vector<std::uint8_t>& invalid) {
  SceneTile s;
  s.id = id;
  std::uniform_real_distribution<double> u(0.0, 0.4);
  for (auto& ch : s.channels) {
    ch = RealGrid(t, 0.0);
    for (auto& v : ch.cells()) v = u(rng);
  }
  s.invalid = BinaryMask(t, invalid);
  return s;
}

// Per-tile transform done independently of the compositor: z-score over the
// tile's valid cells, then the logistic byte.
std::vector<int> transformed(const SceneTile& s, std::size_t band) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.invalid.size(); ++i) {
    if (!s.invalid[i]) {
      sum += s.channels[band][i];
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < s.invalid.size(); ++i) {
    if (!s.invalid[i]) ss += (s.channels[band][i] - mean) * (s.channels[band][i] - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  std::vector<int> out(s.invalid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<int>(std::lround(255.0 / (1.0 + std::exp(-0.6 * (s.channels[band][i] - mean) / sd))));
  }
  return out;
}

BBox bbox_of(const GeoTransform& t) { return {t.origin_lon, t.min_lat(), t.max_lon(), t.origin_lat}; }

}  // namespace

TEST_CASE("cloud_fraction") {
  const GeoTransform t(0, 1, 0.1, 10, 10);
  BinaryMask m(t, std::uint8_t{0});
  CHECK(cloud_fraction(m) == 0.0);
  m[3] = m[50] = m[99] = 1;
  CHECK(cloud_fraction(m) == doctest::Approx(0.03));
  CHECK(cloud_fraction(BinaryMask(t, std::uint8_t{1})) == 1.0);
}

TEST_CASE("buffer_invalid") {
  // Near the equator 1e-5 degrees is about 1.11 m; pick cells of 10 m.
  const double cs = 10.0 / 111320.0;
  const GeoTransform t(0.0, cs * 5.5, cs, 11, 11);
  BinaryMask m(t, std::uint8_t{0});
  m(5, 5) = 1;
  CHECK(buffer_invalid(m, 0.0) == m);

  const BinaryMask one = buffer_invalid(m, 10.0);
  std::size_t set = 0;
  for (auto v : one.cells()) set += v;
  CHECK(set == 5);
  CHECK(one(4, 5) == 1);
  CHECK(one(5, 6) == 1);
  CHECK(one(4, 4) == 0);

  const BufferRadius r = buffer_radius_cells(GeoTransform(0.0, cs * 100, cs, 200, 200), 500.0);
  CHECK(r.rows == 50);
  CHECK(r.cols == 50);

  SUBCASE("parallel matches serial on random masks") {
    std::mt19937_64 rng(17);
    BinaryMask big(GeoTransform(30.0, 60.0, 0.0003, 150, 170), std::uint8_t{0});
    for (auto& v : big.cells()) v = std::bernoulli_distribution(0.01)(rng);
    for (double radius : {0.0, 20.0, 75.0, 260.0}) CHECK(buffer_invalid(big, radius) == serial::buffer_invalid(big, radius));
  }
}

TEST_CASE("greedy_composite") {
  const GeoTransform t(0.0, 0.02, 0.01, 2, 2);
  std::mt19937_64 rng(23);

  SUBCASE("one clear tile") {
    InMemoryTileProvider p({make_tile("a", t, rng, {0, 0, 0, 0})});
    const CompositeResult r = greedy_composite(p, bbox_of(t));
    REQUIRE(r.accepted.size() == 1);
    CHECK(r.uncovered_fraction == 0.0);
    SceneTile tile = p.fetch("a");
    for (std::size_t b = 0; b < 4; ++b) {
      const auto want = transformed(tile, b);
      for (std::size_t i = 0; i < 4; ++i) CHECK(static_cast<int>(r.nrgb[b][i]) == want[i]);
    }
  }

  SUBCASE("complementary halves") {
    CompositeOptions opt;
    opt.buffer_m = 0.0;
    InMemoryTileProvider p({make_tile("top", t, rng, {0, 0, 1, 1}), make_tile("bottom", t, rng, {1, 1, 0, 0})});
    std::map<std::string, std::set<std::size_t>> used;
    opt.on_contribution = [&](const std::string& id, Cell, Cell out) {
      used[id].insert(static_cast<std::size_t>(out.row * 2 + out.col));
    };
    const CompositeResult r = greedy_composite(p, bbox_of(t), opt);
    CHECK(r.uncovered_fraction == 0.0);
    CHECK(r.accepted.size() == 2);
    CHECK(used["top"] == std::set<std::size_t>{0, 1});
    CHECK(used["bottom"] == std::set<std::size_t>{2, 3});
    const auto top = transformed(p.fetch("top"), 0);
    const auto bottom = transformed(p.fetch("bottom"), 0);
    CHECK(r.nrgb[0][0] == top[0]);
    CHECK(r.nrgb[0][3] == bottom[3]);
  }

  SUBCASE("two clear tiles average") {
    CompositeOptions opt;
    opt.min_tiles = 2;
    InMemoryTileProvider p({make_tile("a", t, rng, {0, 0, 0, 0}), make_tile("b", t, rng, {0, 0, 0, 0})});
    const CompositeResult r = greedy_composite(p, bbox_of(t), opt);
    REQUIRE(r.accepted.size() == 2);
    for (std::size_t b = 0; b < 4; ++b) {
      const auto x = transformed(p.fetch("a"), b);
      const auto y = transformed(p.fetch("b"), b);
      for (std::size_t i = 0; i < 4; ++i) {
        CHECK(static_cast<int>(r.nrgb[b][i]) == static_cast<int>(std::lround((x[i] + y[i]) / 2.0)));
      }
    }
  }

  SUBCASE("enumeration and errors") {
    InMemoryTileProvider p({make_tile("cloudy", t, rng, {1, 1, 1, 0}), make_tile("clear", t, rng, {0, 0, 0, 0})});
    const auto list = p.enumerate(bbox_of(t));
    REQUIRE(list.size() == 2);
    CHECK(list[0].id == "clear");
    CHECK_THROWS_AS(p.fetch("nope"), InputError);
    InMemoryTileProvider empty({});
    CHECK_THROWS_AS(greedy_composite(empty, bbox_of(t)), InputError);
  }

  SUBCASE("never fully covered") {
    InMemoryTileProvider p({make_tile("a", t, rng, {1, 0, 0, 0})});
    CompositeOptions opt;
    opt.buffer_m = 0.0;
    const CompositeResult r = greedy_composite(p, bbox_of(t), opt);
    CHECK(r.uncovered_fraction == doctest::Approx(0.25));
    CHECK(r.coverage[0] == 0);
    CHECK(r.coverage[1] == 1);
  }
}

TEST_CASE("manifest provider") {
  const auto dir = std::filesystem::temp_directory_path() / "waterline_manifest_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir / "t");
  std::mt19937_64 rng(8);
  const GeoTransform t(0.0, 0.03, 0.01, 3, 3);
  std::ofstream man(dir / "tiles.txt");
  man << "# id nir red green blue mask\n";
  for (const std::string id : {"s1", "s2"}) {
    const SceneTile s = make_tile(id, t, rng, id == "s1" ? std::vector<std::uint8_t>(9, 0)
                                                         : std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0, 0, 0, 0});
    const char* names[4] = {"n", "r", "g", "b"};
    for (std::size_t b = 0; b < 4; ++b) write_ascii_grid(dir / "t" / (id + names[b] + ".asc"), s.channels[b]);
    write_ascii_grid(dir / "t" / (id + "m.asc"), s.invalid);
    man << id << " t/" << id << "n.asc t/" << id << "r.asc t/" << id << "g.asc t/" << id << "b.asc t/" << id
        << "m.asc\n";
  }
  man.close();
  ManifestTileProvider p(dir / "tiles.txt");
  const auto list = p.enumerate(bbox_of(t));
  REQUIRE(list.size() == 2);
  CHECK(list[0].id == "s1");
  CHECK(list[1].cloud_fraction == doctest::Approx(1.0 / 9.0));
  CHECK(p.fetch("s2").invalid[0] == 1);
  CHECK_THROWS_AS(ManifestTileProvider(dir / "missing.txt"), InputError);
  std::filesystem::remove_all(dir);
}
