#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "waterline/ascii_grid.hpp"
#include "waterline/raster.hpp"

using namespace waterline;

namespace {

RealGrid grid2x2(double lon, double lat, std::vector<double> v) {
  return RealGrid(GeoTransform(lon, lat, 1.0, 2, 2), std::move(v), -9999.0);
}

}  // namespace

TEST_CASE("geo_to_pixel and pixel_to_geo") {
  const GeoTransform t(10.0, 50.0, 0.25, 5, 7);
  const GeoPoint c00 = pixel_to_geo(t, 0, 0);
  CHECK(c00.lon == doctest::Approx(10.125));
  CHECK(c00.lat == doctest::Approx(49.875));
  auto px = geo_to_pixel(t, c00.lon, c00.lat);
  REQUIRE(px);
  CHECK(*px == Cell{0, 0});
  CHECK_FALSE(geo_to_pixel(t, 10.0 - 0.25, 49.9));
  CHECK_FALSE(geo_to_pixel(t, 10.1, 50.1));
  CHECK_FALSE(geo_to_pixel(t, t.max_lon(), 49.9));

  SUBCASE("random 7x5 grid round-trips every cell centre") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-170.0, 170.0);
    for (int trial = 0; trial < 20; ++trial) {
      const GeoTransform g(u(rng), u(rng) / 2.0, 0.001 + 0.01 * std::abs(u(rng)) / 170.0, 7, 5);
      for (std::size_t r = 0; r < 7; ++r) {
        for (std::size_t c = 0; c < 5; ++c) {
          const GeoPoint p = pixel_to_geo(g, r, c);
          const auto back = geo_to_pixel(g, p.lon, p.lat);
          REQUIRE(back);
          CHECK(back->row == static_cast<std::ptrdiff_t>(r));
          CHECK(back->col == static_cast<std::ptrdiff_t>(c));
        }
      }
    }
  }
}

TEST_CASE("GeoTransform rejects degenerate geometry") {
  CHECK_THROWS_AS(GeoTransform(0, 0, 0.0, 1, 1), InputError);
  CHECK_THROWS_AS(GeoTransform(0, 0, 1.0, 0, 1), InputError);
  CHECK_THROWS_AS(RealGrid(GeoTransform(0, 0, 1.0, 2, 2), std::vector<double>(3, 0.0)), InputError);
}

TEST_CASE("neighbors") {
  const GeoTransform t(0, 3, 1.0, 3, 3);
  CHECK(neighbors(t, 0, 0, Connectivity::Eight).size() == 3);
  CHECK(neighbors(t, 1, 1, Connectivity::Four).size() == 4);
  CHECK_THROWS_AS(neighbors(t, 3, 0, Connectivity::Eight), InputError);

  SUBCASE("3x3 count pattern") {
    const std::vector<std::size_t> expected = {3, 5, 3, 5, 8, 5, 3, 5, 3};
    for (std::ptrdiff_t r = 0; r < 3; ++r) {
      for (std::ptrdiff_t c = 0; c < 3; ++c) {
        const auto n = neighbors(t, r, c, Connectivity::Eight);
        CHECK(n.size() == expected[static_cast<std::size_t>(r * 3 + c)]);
        CHECK(std::find(n.begin(), n.end(), Cell{r, c}) == n.end());
      }
    }
  }
}

TEST_CASE("merge_tiles") {
  const RealGrid a = grid2x2(0, 2, {1, 2, 3, 4});

  SUBCASE("single tile is unchanged") {
    const RealGrid m = merge_tiles({a});
    CHECK(m.cells() == a.cells());
    CHECK(m.transform().same_grid(a.transform()));
  }

  SUBCASE("adjacent tiles form a 2x4 grid") {
    const RealGrid b = grid2x2(2, 2, {5, 6, 7, 8});
    const RealGrid m = merge_tiles({a, b});
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 4);
    CHECK(m.cells() == std::vector<double>{1, 2, 5, 6, 3, 4, 7, 8});
    const RealGrid m2 = merge_tiles({b, a});
    CHECK(m2 == m);
  }

  SUBCASE("conflicting overlap is an error") {
    const RealGrid x = grid2x2(0, 2, {0, 0, 0, 0});
    const RealGrid y = grid2x2(1, 1, {1, 1, 1, 1});  // overlaps x at its (1, 1)
    CHECK_THROWS_AS(merge_tiles({x, y}), InputError);
    const RealGrid z = grid2x2(1, 1, {0, 1, 1, 1});  // agrees on the shared cell
    const RealGrid m = merge_tiles({x, z});
    CHECK(m.rows() == 3);
    CHECK(m(0, 2) == -9999.0);
    CHECK(m.is_nodata(2));
  }

  SUBCASE("misaligned tiles are an error") {
    const RealGrid b = grid2x2(2.5, 2, {5, 6, 7, 8});
    CHECK_THROWS_AS(merge_tiles({a, b}), InputError);
  }

  SUBCASE("order invariance on random disjoint tilings") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<RealGrid> tiles;
    for (int ty = 0; ty < 3; ++ty) {
      for (int tx = 0; tx < 3; ++tx) {
        if ((tx + ty) % 4 == 3) continue;  // leave holes
        std::vector<double> v(4);
        for (auto& x : v) x = u(rng);
        tiles.push_back(grid2x2(2.0 * tx, 6.0 - 2.0 * ty, v));
      }
    }
    const RealGrid ref = merge_tiles(tiles);
    for (int k = 0; k < 10; ++k) {
      std::shuffle(tiles.begin(), tiles.end(), rng);
      CHECK(merge_tiles(tiles) == ref);
    }
    for (const auto& t : tiles) {
      for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
          const GeoPoint p = t.transform().cell_center(r, c);
          const auto cell = geo_to_pixel(ref.transform(), p.lon, p.lat);
          REQUIRE(cell);
          CHECK(ref(static_cast<std::size_t>(cell->row), static_cast<std::size_t>(cell->col)) == t(r, c));
        }
      }
    }
  }
}

TEST_CASE("ESRI ASCII grid") {
  const std::string text =
      "ncols 3\nnrows 2\nxllcorner 10\nyllcorner 20\ncellsize 0.5\nNODATA_value -9999\n"
      "1 2.5 -9999\n0.1 1e-07 -3\n";
  std::istringstream in(text);
  const RealGrid g = read_ascii_grid(in);
  CHECK(g.rows() == 2);
  CHECK(g.cols() == 3);
  CHECK(g.transform().origin_lat == doctest::Approx(21.0));
  CHECK(g(0, 1) == 2.5);
  CHECK(g.is_nodata(2));
  CHECK(g(1, 1) == 1e-07);

  std::ostringstream out;
  write_ascii_grid(out, g);
  CHECK(out.str() == text);

  SUBCASE("lowercase keys and centre registration") {
    std::istringstream c("NCOLS 1\nNROWS 1\nXLLCENTER 0.5\nYLLCENTER 0.5\nCELLSIZE 1\n7\n");
    const RealGrid h = read_ascii_grid(c);
    CHECK(h.transform().origin_lon == 0.0);
    CHECK(h.transform().origin_lat == 1.0);
    CHECK_FALSE(h.nodata());
  }
  SUBCASE("malformed inputs") {
    std::istringstream short_body("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1\n");
    CHECK_THROWS_AS(read_ascii_grid(short_body), InputError);
    std::istringstream no_size("ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\n1\n");
    CHECK_THROWS_AS(read_ascii_grid(no_size), InputError);
    std::istringstream junk("ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nabc\n");
    CHECK_THROWS_AS(read_ascii_grid(junk), InputError);
  }
  SUBCASE("shortest round-trip formatting") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
      const double v = u(rng) / 7.0;
      CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-0.0) == "0");
  }
}
