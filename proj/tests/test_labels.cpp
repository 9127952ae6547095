#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "waterline/labels.hpp"

using namespace waterline;

namespace {

const GeoTransform kGrid(0.0, 5.0, 1.0, 5, 5);

LabeledGeometry line(Polyline pts, std::string type) {
  return {GeometryKind::LineString, {std::move(pts)}, std::move(type)};
}

LabeledGeometry polygon(std::vector<Polyline> rings, std::string type) {
  return {GeometryKind::Polygon, std::move(rings), std::move(type)};
}

std::size_t count_label(const LabelGrid& g, std::int32_t v) {
  return static_cast<std::size_t>(std::count(g.cells().begin(), g.cells().end(), v));
}

}  // namespace

TEST_CASE("default weight table") {
  const FcodeWeightTable t = FcodeWeightTable::defaults();
  const std::vector<std::pair<std::string, double>> expect = {
      {"playa", 0.0},           {"Inundation area", 0.0},   {"Swamp Intermittent", 0.5},
      {"Swamp Perennial", 0.5}, {"Swamp", 0.5},             {"Reservoir", 0.5},
      {"Lake Intermittent", 0.5}, {"Lake Perennial", 3.25}, {"Lake", 3.25},
      {"spillway", 0.0},        {"drainage", 0.5},          {"wash", 1.5},
      {"canal storm", 0.5},     {"canal aqua", 0.5},        {"canal", 0.5},
      {"artificial path", 2.5}, {"Ephemeral Streams", 3.5}, {"Intermittent Streams", 3.75},
      {"Perennial Streams", 3.25}, {"Streams Other", 3.25}, {"other", 0.5},
  };
  CHECK(t.entries() == expect);
  CHECK(t.label_of("playa") == 1);
  CHECK(t.weight_of_label(t.label_of("Perennial Streams")) == 3.25);
  CHECK_THROWS_AS(t.label_of("ocean"), InputError);

  SUBCASE("config overrides") {
    std::istringstream in("# flood tuning\nSwamp = 1.25\n\nnew type = 2\n");
    const FcodeWeightTable u = FcodeWeightTable::parse(in);
    CHECK(u.weight_of_label(u.label_of("Swamp")) == 1.25);
    CHECK(u.label_of("Swamp") == t.label_of("Swamp"));
    CHECK(u.label_of("new type") == 22);
    std::ostringstream out;
    u.write(out);
    std::istringstream back(out.str());
    CHECK(FcodeWeightTable::parse(back).entries() == u.entries());

    std::istringstream neg("Swamp = -1\n");
    CHECK_THROWS_AS(FcodeWeightTable::parse(neg), InputError);
    std::istringstream junk("Swamp 1\n");
    CHECK_THROWS_AS(FcodeWeightTable::parse(junk), InputError);
  }
}

TEST_CASE("burn_vectors") {
  const FcodeWeightTable t = FcodeWeightTable::defaults();
  const std::int32_t per = t.label_of("Perennial Streams");

  SUBCASE("horizontal segment through three centres") {
    const LabelGrid g = burn_vectors({line({{1.5, 2.5}, {3.5, 2.5}}, "Perennial Streams")}, kGrid, t);
    CHECK(count_label(g, per) == 3);
    CHECK(g(2, 1) == per);
    CHECK(g(2, 2) == per);
    CHECK(g(2, 3) == per);
  }

  SUBCASE("square ring covering a 2x2 block") {
    const LabelGrid g =
        burn_vectors({polygon({{{1.0, 4.0}, {3.0, 4.0}, {3.0, 2.0}, {1.0, 2.0}, {1.0, 4.0}}}, "Lake")}, kGrid, t);
    CHECK(count_label(g, t.label_of("Lake")) == 4);
    CHECK(g(1, 1) == t.label_of("Lake"));
    CHECK(g(2, 2) == t.label_of("Lake"));
  }

  SUBCASE("polygon hole") {
    const Polyline outer = {{0.0, 5.0}, {5.0, 5.0}, {5.0, 0.0}, {0.0, 0.0}};
    const Polyline hole = {{2.0, 3.0}, {3.0, 3.0}, {3.0, 2.0}, {2.0, 2.0}};
    const LabelGrid g = burn_vectors({polygon({outer, hole}, "Swamp")}, kGrid, t);
    CHECK(count_label(g, t.label_of("Swamp")) == 24);
    CHECK(g(2, 2) == 0);
  }

  SUBCASE("empty list") {
    const LabelGrid g = burn_vectors(std::vector<LabeledGeometry>{}, kGrid, t);
    CHECK(count_label(g, 0) == 25);
  }

  SUBCASE("diagonal supercover and later overwrite") {
    const LabelGrid g = burn_vectors({line({{0.5, 4.5}, {4.5, 0.5}}, "canal"), line({{2.5, 0.1}, {2.5, 4.9}}, "wash")},
                                     kGrid, t);
    for (std::size_t i = 0; i < 5; ++i) {
      if (i != 2) CHECK(g(i, i) == t.label_of("canal"));
      CHECK(g(i, 2) == t.label_of("wash"));
    }
    // the diagonal passes exactly through corners; the four-way touches
    // mark the side cells too
    CHECK(g(0, 1) == t.label_of("canal"));
  }

  SUBCASE("convenience overload burns polygons first") {
    const LabelGrid g = burn_vectors({{{{0.5, 2.5}, {4.5, 2.5}}, "Perennial Streams"}},
                                     {{{{{0.0, 5.0}, {5.0, 5.0}, {5.0, 0.0}, {0.0, 0.0}}}, "Lake"}}, kGrid, t);
    CHECK(count_label(g, per) == 5);
    CHECK(count_label(g, t.label_of("Lake")) == 20);
  }

  SUBCASE("unknown type") {
    CHECK_THROWS_AS(burn_vectors({line({{0.5, 0.5}, {1.5, 0.5}}, "river of doubt")}, kGrid, t), InputError);
  }

  SUBCASE("translation invariance") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    std::vector<LabeledGeometry> geoms;
    for (int i = 0; i < 6; ++i) geoms.push_back(line({{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}}, "canal"));
    geoms.push_back(polygon({{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}}}, "Lake"));
    const LabelGrid a = burn_vectors(geoms, kGrid, t);
    for (auto& gm : geoms) {
      for (auto& r : gm.rings) {
        for (auto& p : r) {
          p.lon += 7.0;
          p.lat -= 3.0;
        }
      }
    }
    const LabelGrid b = burn_vectors(geoms, GeoTransform(7.0, 2.0, 1.0, 5, 5), t);
    CHECK(a.cells() == b.cells());
  }
}

TEST_CASE("weights_from_labels") {
  const FcodeWeightTable t = FcodeWeightTable::defaults();
  LabelGrid labels(GeoTransform(0, 1, 0.25, 1, 4), std::vector<std::int32_t>{
                                                      0, t.label_of("playa"), t.label_of("Swamp"),
                                                      t.label_of("Perennial Streams")});
  const TrainingTargets tt = weights_from_labels(labels, t);
  CHECK(tt.target.cells() == std::vector<std::uint8_t>{0, 0, 0, 1});
  CHECK(tt.weight.cells() == std::vector<double>{1.0, 1.0, 0.0, 3.25});

  labels[0] = 99;
  CHECK_THROWS_AS(weights_from_labels(labels, t), InputError);
}

TEST_CASE("weighted_bce") {
  const GeoTransform one(0, 1, 1, 1, 1);
  const double l = weighted_bce(RealGrid(one, 0.5), BinaryMask(one, std::uint8_t{1}), RealGrid(one, 3.25));
  CHECK(std::abs(l - 3.25 * std::log(2.0)) < 1e-12);

  const GeoTransform t(0, 1, 1, 2, 2);
  const BinaryMask target(t, std::vector<std::uint8_t>{1, 0, 1, 0});
  const double perfect = weighted_bce(RealGrid(t, std::vector<double>{1.0, 0.0, 1.0, 0.0}), target, RealGrid(t, 1.0));
  CHECK(perfect >= 0.0);
  CHECK(perfect <= -std::log(1.0 - kBceEpsilon) + 1e-15);

  const RealGrid masked_w(t, std::vector<double>{0.0, 0.0, 0.0, 1.0});
  CHECK(std::abs(weighted_bce(RealGrid(t, 0.5), target, masked_w) - std::log(2.0)) < 1e-12);

  CHECK_THROWS_AS(weighted_bce(RealGrid(t, 0.5), target, RealGrid(t, 0.0)), InputError);

  SUBCASE("masked cells do not matter") {
    std::mt19937_64 rng(5);
    const GeoTransform big(0, 1, 0.1, 10, 10);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    RealGrid pred(big, 0.0), weight(big, 0.0);
    BinaryMask tg(big, std::uint8_t{0});
    for (std::size_t i = 0; i < big.size(); ++i) {
      pred[i] = u(rng);
      tg[i] = u(rng) > 0.5;
      weight[i] = i % 3 == 0 ? 0.0 : 1.0 + u(rng);
    }
    const double base = weighted_bce(pred, tg, weight);
    CHECK(base >= 0.0);
    for (std::size_t i = 0; i < big.size(); i += 3) pred[i] = u(rng);
    CHECK(weighted_bce(pred, tg, weight) == base);
  }

  SUBCASE("monotone in prediction") {
    const BinaryMask pos(one, std::uint8_t{1});
    const BinaryMask neg(one, std::uint8_t{0});
    double prev_pos = INFINITY;
    double prev_neg = -1.0;
    for (int k = 1; k < 100; ++k) {
      const RealGrid p(one, k / 100.0);
      const double lp = weighted_bce(p, pos, RealGrid(one, 1.0));
      const double ln = weighted_bce(p, neg, RealGrid(one, 1.0));
      CHECK(lp < prev_pos);
      CHECK(ln > prev_neg);
      prev_pos = lp;
      prev_neg = ln;
    }
  }
}
