#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's algorithms.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "waterline/raster.hpp"

namespace oracle {

using waterline::BinaryMask;
using waterline::GeoPoint;
using waterline::GeoTransform;
using waterline::RealGrid;

/// round(255 / (1 + e^{-0.6 x})) evaluated with 50 decimal digits.
inline int sigmoid_byte(double x) {
  using big = boost::multiprecision::cpp_bin_float_50;
  const big y = big(255) / (big(1) + boost::multiprecision::exp(big(-0.6) * big(x)));
  const big r = boost::multiprecision::floor(y + big(0.5));
  return r.convert_to<int>();
}

/// Number of foreground components (8-connected) and background components
/// (4-connected, with the area outside the grid counted as background).
struct Topology {
  std::size_t foreground = 0;
  std::size_t background = 0;
  friend bool operator==(const Topology&, const Topology&) = default;
};

inline std::size_t count_components(const std::vector<std::uint8_t>& on, std::size_t rows,
                                    std::size_t cols, bool eight) {
  std::vector<std::uint8_t> seen(on.size(), 0);
  std::size_t n = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < on.size(); ++s) {
    if (!on[s] || seen[s]) continue;
    ++n;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const long r = static_cast<long>(p / cols);
      const long c = static_cast<long>(p % cols);
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          if (!dr && !dc) continue;
          if (!eight && dr && dc) continue;
          const long nr = r + dr;
          const long nc = c + dc;
          if (nr < 0 || nc < 0 || nr >= static_cast<long>(rows) || nc >= static_cast<long>(cols)) continue;
          const std::size_t q = static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
          if (on[q] && !seen[q]) {
            seen[q] = 1;
            stack.push_back(q);
          }
        }
      }
    }
  }
  return n;
}

inline Topology topology(const BinaryMask& m) {
  const std::size_t rows = m.rows() + 2;
  const std::size_t cols = m.cols() + 2;
  std::vector<std::uint8_t> fg(rows * cols, 0);
  std::vector<std::uint8_t> bg(rows * cols, 1);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      fg[(r + 1) * cols + c + 1] = m(r, c);
      bg[(r + 1) * cols + c + 1] = m(r, c) ? 0 : 1;
    }
  }
  return {count_components(fg, rows, cols, true), count_components(bg, rows, cols, false)};
}

enum class State { S, I, R };

/// Classifies a foreground cell by removing it from its 3x3 window and
/// comparing component counts before and after.
inline State classify(const BinaryMask& m, std::size_t r, std::size_t c) {
  std::vector<std::uint8_t> win(9, 0);
  int n = 0;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const long rr = static_cast<long>(r) + dr;
      const long cc = static_cast<long>(c) + dc;
      std::uint8_t v = 0;
      if (rr >= 0 && cc >= 0 && rr < static_cast<long>(m.rows()) && cc < static_cast<long>(m.cols())) {
        v = m(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
      }
      win[static_cast<std::size_t>((dr + 1) * 3 + dc + 1)] = v;
      if ((dr || dc) && v) ++n;
    }
  }
  if (n <= 1) return State::S;
  std::vector<std::uint8_t> after = win;
  after[4] = 0;
  if (count_components(win, 3, 3, true) != count_components(after, 3, 3, true)) return State::S;
  std::vector<std::uint8_t> bg_before(9), bg_after(9);
  for (std::size_t i = 0; i < 9; ++i) {
    bg_before[i] = win[i] ? 0 : 1;
    bg_after[i] = after[i] ? 0 : 1;
  }
  if (count_components(bg_before, 3, 3, false) != count_components(bg_after, 3, 3, false)) return State::I;
  return State::R;
}

inline bool has_2x2_block(const BinaryMask& m) {
  for (std::size_t r = 0; r + 1 < m.rows(); ++r) {
    for (std::size_t c = 0; c + 1 < m.cols(); ++c) {
      if (m(r, c) && m(r, c + 1) && m(r + 1, c) && m(r + 1, c + 1)) return true;
    }
  }
  return false;
}

inline BinaryMask random_mask(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double density) {
  BinaryMask m(GeoTransform(0.0, 1.0, 0.01, rows, cols), std::uint8_t{0});
  std::bernoulli_distribution on(density);
  for (auto& v : m.cells()) v = on(rng) ? 1 : 0;
  return m;
}

inline RealGrid random_elevation(std::mt19937_64& rng, const GeoTransform& t) {
  RealGrid e(t, 0.0);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (auto& v : e.cells()) v = u(rng);
  return e;
}

/// Clamped-projection distance from p to segment ab in degree space.
inline double segment_distance(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  const double vx = b.lon - a.lon;
  const double vy = b.lat - a.lat;
  const double wx = p.lon - a.lon;
  const double wy = p.lat - a.lat;
  const double len2 = vx * vx + vy * vy;
  if (len2 == 0.0) return std::sqrt(wx * wx + wy * wy);
  const double t = std::max(0.0, std::min(1.0, (wx * vx + wy * vy) / len2));
  const double dx = wx - t * vx;
  const double dy = wy - t * vy;
  return std::sqrt(dx * dx + dy * dy);
}

/// Exhaustive nearest distance over every segment of every polyline.
inline double nearest(const GeoPoint& p, const std::vector<std::vector<GeoPoint>>& lines) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : lines) {
    if (l.size() == 1) best = std::min(best, segment_distance(p, l[0], l[0]));
    for (std::size_t i = 1; i < l.size(); ++i) best = std::min(best, segment_distance(p, l[i - 1], l[i]));
  }
  return best;
}

/// Classical Strahler order by recursion from the leaves of a rooted tree.
/// children[v] lists the children of vertex v; returns the order of the edge
/// entering each vertex (index = child vertex).
inline std::vector<int> strahler(const std::vector<std::vector<std::size_t>>& children) {
  std::vector<int> order(children.size(), 0);
  // vertices are numbered so that children have larger ids than parents
  for (std::size_t v = children.size(); v-- > 0;) {
    if (children[v].empty()) {
      order[v] = 1;
      continue;
    }
    int best = 0;
    int ties = 0;
    for (auto ch : children[v]) {
      if (order[ch] > best) {
        best = order[ch];
        ties = 1;
      } else if (order[ch] == best) {
        ++ties;
      }
    }
    order[v] = ties >= 2 ? best + 1 : best;
  }
  return order;
}

}  // namespace oracle
