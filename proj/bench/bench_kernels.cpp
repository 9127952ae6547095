// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "waterline/compositing.hpp"
#include "waterline/evaluation.hpp"
#include "waterline/features.hpp"
#include "waterline/thinning.hpp"

using namespace waterline;

namespace {

RealGrid random_real(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 500.0);
  RealGrid g(GeoTransform(30.0, 0.0, 0.0004, n, n), 0.0);
  for (auto& v : g.cells()) v = u(rng);
  return g;
}

BinaryMask random_binary(std::size_t n, double density, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution on(density);
  BinaryMask m(GeoTransform(30.0, 0.0, 0.0004, n, n), std::uint8_t{0});
  for (auto& v : m.cells()) v = on(rng) ? 1 : 0;
  return m;
}

// Many independent blobs, the shape thinning sees after thresholding.
BinaryMask blobs(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  BinaryMask m(GeoTransform(30.0, 0.0, 0.0004, n, n), std::uint8_t{0});
  std::uniform_int_distribution<std::size_t> pos(0, n - 1);
  std::uniform_int_distribution<int> len(5, 60);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t r = pos(rng), c = pos(rng);
    const int steps = len(rng);
    for (int s = 0; s < steps; ++s) {
      for (std::size_t dr = 0; dr < 3 && r + dr < n; ++dr) {
        for (std::size_t dc = 0; dc < 3 && c + dc < n; ++dc) m(r + dr, c + dc) = 1;
      }
      r = std::min(n - 1, r + (rng() % 2));
      c = std::min(n - 1, c + (rng() % 2));
    }
  }
  return m;
}

void BM_elevation_channels(benchmark::State& st) {
  const RealGrid e = random_real(static_cast<std::size_t>(st.range(1)), 1);
  for (auto _ : st) {
    benchmark::DoNotOptimize(st.range(0) ? elevation_channels(e) : serial::elevation_channels(e));
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(e.size()));
}

void BM_normalize(benchmark::State& st) {
  const RealGrid e = random_real(static_cast<std::size_t>(st.range(1)), 2);
  for (auto _ : st) {
    benchmark::DoNotOptimize(st.range(0) ? normalize_channel(e) : serial::normalize_channel(e));
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(e.size()));
}

// 10 m cells with the 500 m cloud buffer: a 50-cell radius.
void BM_buffer_invalid(benchmark::State& st) {
  const BinaryMask speckle = random_binary(static_cast<std::size_t>(st.range(1)), 0.01, 3);
  const BinaryMask m(GeoTransform(30.0, 0.0, 10.0 / kMetersPerDegree, speckle.rows(), speckle.cols()),
                     speckle.cells());
  for (auto _ : st) {
    benchmark::DoNotOptimize(st.range(0) ? buffer_invalid(m, 500.0) : serial::buffer_invalid(m, 500.0));
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(m.size()));
}

void BM_thin(benchmark::State& st) {
  const BinaryMask m = blobs(static_cast<std::size_t>(st.range(1)), 4);
  const RealGrid e = random_real(m.rows(), 5);
  for (auto _ : st) benchmark::DoNotOptimize(st.range(0) ? thin(m, e) : serial::thin(m, e));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(m.size()));
}

void BM_nearest_distances(benchmark::State& st) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  std::uniform_real_distribution<double> step(-0.002, 0.002);
  std::vector<Polyline> lines;
  for (int i = 0; i < 500; ++i) {
    Polyline l{{u(rng), u(rng)}};
    for (int j = 0; j < 40; ++j) l.push_back({l.back().lon + step(rng), l.back().lat + step(rng)});
    lines.push_back(l);
  }
  const ReferenceIndex idx(lines, 0.002);
  std::vector<CategorizedPoint> pts(static_cast<std::size_t>(st.range(1)));
  for (auto& p : pts) p.point = {u(rng), u(rng)};
  for (auto _ : st) {
    benchmark::DoNotOptimize(st.range(0) ? nearest_distances(pts, idx) : serial::nearest_distances(pts, idx));
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(pts.size()));
}

}  // namespace

// First argument: 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_elevation_channels)->ArgsProduct({{0, 1}, {512, 2048}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_normalize)->ArgsProduct({{0, 1}, {512, 2048}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_buffer_invalid)->ArgsProduct({{0, 1}, {512, 1024}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_thin)->ArgsProduct({{0, 1}, {256, 512}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_nearest_distances)->ArgsProduct({{0, 1}, {20000}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
