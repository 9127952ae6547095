#include "waterline/thinning.hpp"

#include <array>
#include <limits>
#include <queue>
#include <vector>

namespace waterline {

namespace {

// Ring order N, NE, E, SE, S, SW, W, NW; bit k set when ring cell k is foreground.
constexpr std::array<std::array<int, 2>, 8> kRing = {
    {{-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}}};

struct NeighborhoodInfo {
  std::uint8_t count = 0;
  std::uint8_t fg_components = 0;  // 8-connected, centre excluded
  std::uint8_t bg_components = 0;  // 4-connected, only those touching a 4-neighbour
};

std::array<NeighborhoodInfo, 256> build_table() {
  std::array<NeighborhoodInfo, 256> table{};
  for (unsigned code = 0; code < 256; ++code) {
    NeighborhoodInfo info;
    std::array<int, 8> comp{};
    comp.fill(-1);
    auto adjacent = [](int a, int b, bool eight) {
      const int dr = std::abs(kRing[a][0] - kRing[b][0]);
      const int dc = std::abs(kRing[a][1] - kRing[b][1]);
      return eight ? (dr <= 1 && dc <= 1) : (dr + dc == 1);
    };
    for (int k = 0; k < 8; ++k) info.count += (code >> k) & 1u;

    for (int pass = 0; pass < 2; ++pass) {
      const bool fg = pass == 0;
      comp.fill(-1);
      int n = 0;
      for (int s = 0; s < 8; ++s) {
        if ((((code >> s) & 1u) != 0) != fg || comp[s] >= 0) continue;
        // flood within the ring
        std::array<int, 8> stack{};
        int top = 0;
        stack[top++] = s;
        comp[s] = n;
        bool touches_four = (s % 2) == 0;
        while (top) {
          const int a = stack[--top];
          for (int b = 0; b < 8; ++b) {
            if ((((code >> b) & 1u) != 0) != fg || comp[b] >= 0 || !adjacent(a, b, fg)) continue;
            comp[b] = n;
            touches_four = touches_four || (b % 2) == 0;
            stack[top++] = b;
          }
        }
        if (fg || touches_four) ++n;
        else {
          for (auto& c : comp) {
            if (c == n) c = 99;  // discard component not touching the centre
          }
        }
      }
      if (fg) info.fg_components = static_cast<std::uint8_t>(n);
      else info.bg_components = static_cast<std::uint8_t>(n);
    }
    table[code] = info;
  }
  return table;
}

const std::array<NeighborhoodInfo, 256>& table() {
  static const auto t = build_table();
  return t;
}

CellState state_from_code(unsigned code) {
  const NeighborhoodInfo& info = table()[code];
  if (info.count <= 1 || info.fg_components != 1) return CellState::Skeleton;
  if (info.bg_components != 1) return CellState::Interior;
  return CellState::Removable;
}

// Foreground buffer with a one-cell background border.
class PaddedMask {
 public:
  PaddedMask(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_(cols + 2), cells_((rows + 2) * (cols + 2), 0) {
    for (std::size_t k = 0; k < 8; ++k) {
      offset_[k] = kRing[k][0] * static_cast<std::ptrdiff_t>(stride_) + kRing[k][1];
    }
  }
  std::size_t at(std::size_t r, std::size_t c) const { return (r + 1) * stride_ + (c + 1); }
  std::uint8_t& operator[](std::size_t p) { return cells_[p]; }
  std::uint8_t operator[](std::size_t p) const { return cells_[p]; }
  std::size_t neighbor(std::size_t p, std::size_t k) const {
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(p) + offset_[k]);
  }
  unsigned code(std::size_t p) const {
    unsigned code = 0;
    for (std::size_t k = 0; k < 8; ++k) code |= static_cast<unsigned>(cells_[neighbor(p, k)] != 0) << k;
    return code;
  }
  CellState state(std::size_t p) const { return state_from_code(code(p)); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t stride_;
  std::vector<std::uint8_t> cells_;
  std::array<std::ptrdiff_t, 8> offset_{};
};

struct QueueEntry {
  double elevation;
  std::size_t order;  // global row-major index, for tie-breaking
  std::size_t pos;    // padded-buffer position
};

struct Priority {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.elevation != b.elevation) return a.elevation < b.elevation;
    return a.order > b.order;
  }
};

double priority_of(const RealGrid& elevation, std::size_t i) {
  return elevation.is_nodata(i) ? -std::numeric_limits<double>::infinity() : elevation[i];
}

// Thins the window [r0, r0 + rows) x [c0, c0 + cols) of `mask`, restricted to
// cells for which `member(i)` holds, and clears removed cells in `out`.
template <typename Member>
void thin_window(const BinaryMask& mask, const RealGrid& elevation, std::size_t r0, std::size_t c0,
                 std::size_t rows, std::size_t cols, Member member, BinaryMask& out,
                 ThinStats& stats, const RemovalObserver& observer) {
  const std::size_t gcols = mask.cols();
  PaddedMask work(rows, cols);
  std::vector<std::size_t> global_of((rows + 2) * (cols + 2), 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t g = (r0 + r) * gcols + (c0 + c);
      const std::size_t p = work.at(r, c);
      global_of[p] = g;
      if (mask[g] && member(g)) work[p] = 1;
    }
  }

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, Priority> heap;
  auto push_if_removable = [&](std::size_t p) {
    if (work[p] && work.state(p) == CellState::Removable) {
      heap.push({priority_of(elevation, global_of[p]), global_of[p], p});
    }
  };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) push_if_removable(work.at(r, c));
  }

  while (!heap.empty()) {
    const QueueEntry e = heap.top();
    heap.pop();
    if (!work[e.pos] || work.state(e.pos) != CellState::Removable) continue;
    if (observer) {
      observer({static_cast<std::ptrdiff_t>(e.order / gcols), static_cast<std::ptrdiff_t>(e.order % gcols)},
               out);
    }
    work[e.pos] = 0;
    out[e.order] = 0;
    ++stats.removed;
    for (std::size_t k = 0; k < 8; ++k) push_if_removable(work.neighbor(e.pos, k));
  }

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t p = work.at(r, c);
      if (!work[p]) continue;
      if (work.state(p) == CellState::Interior) ++stats.stuck_interior;
      else ++stats.skeleton;
    }
  }
}

void check_inputs(const BinaryMask& mask, const RealGrid& elevation) {
  check_binary(mask);
  if (!mask.transform().same_grid(elevation.transform())) {
    throw InputError("thin: mask and elevation grids are not aligned");
  }
}

// 8-connected component id per foreground cell (-1 for background), with the
// bounding box of each component.
struct Components {
  std::vector<std::int32_t> id;
  struct Box {
    std::size_t r0, c0, r1, c1;
  };
  std::vector<Box> boxes;
};

Components label_components(const BinaryMask& mask) {
  const std::size_t rows = mask.rows();
  const std::size_t cols = mask.cols();
  Components comps{std::vector<std::int32_t>(mask.size(), -1), {}};
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < mask.size(); ++s) {
    if (!mask[s] || comps.id[s] >= 0) continue;
    const auto cid = static_cast<std::int32_t>(comps.boxes.size());
    Components::Box box{s / cols, s % cols, s / cols, s % cols};
    comps.id[s] = cid;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t r = p / cols;
      const std::size_t c = p % cols;
      box.r0 = std::min(box.r0, r);
      box.r1 = std::max(box.r1, r);
      box.c0 = std::min(box.c0, c);
      box.c1 = std::max(box.c1, c);
      for (const auto& d : kRing) {
        const auto nr = static_cast<std::ptrdiff_t>(r) + d[0];
        const auto nc = static_cast<std::ptrdiff_t>(c) + d[1];
        if (nr < 0 || nc < 0 || nr >= static_cast<std::ptrdiff_t>(rows) ||
            nc >= static_cast<std::ptrdiff_t>(cols)) {
          continue;
        }
        const std::size_t q = static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
        if (mask[q] && comps.id[q] < 0) {
          comps.id[q] = cid;
          stack.push_back(q);
        }
      }
    }
    comps.boxes.push_back(box);
  }
  return comps;
}

}  // namespace

CellState classify_cell(const BinaryMask& mask, std::size_t r, std::size_t c) {
  if (r >= mask.rows() || c >= mask.cols()) throw InputError("classify_cell: cell outside grid");
  if (mask(r, c) != 1) throw InputError("classify_cell: cell is not a waterway cell");
  unsigned code = 0;
  for (std::size_t k = 0; k < 8; ++k) {
    const auto nr = static_cast<std::ptrdiff_t>(r) + kRing[k][0];
    const auto nc = static_cast<std::ptrdiff_t>(c) + kRing[k][1];
    if (mask.transform().contains(nr, nc) &&
        mask(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)) != 0) {
      code |= 1u << k;
    }
  }
  return state_from_code(code);
}

namespace serial {

BinaryMask thin(const BinaryMask& mask, const RealGrid& elevation, ThinStats* stats,
                const ThinOptions& options) {
  check_inputs(mask, elevation);
  BinaryMask out = mask;
  ThinStats local;
  thin_window(mask, elevation, 0, 0, mask.rows(), mask.cols(), [](std::size_t) { return true; }, out,
              local, options.observer);
  if (stats) *stats = local;
  return out;
}

}  // namespace serial

BinaryMask thin(const BinaryMask& mask, const RealGrid& elevation, ThinStats* stats,
                const ThinOptions& options) {
  if (options.observer) return serial::thin(mask, elevation, stats, options);
  check_inputs(mask, elevation);

  // Cells of different components never share a 3x3 neighbourhood, so each
  // component thins independently and the result matches the global queue.
  const Components comps = label_components(mask);
  BinaryMask out = mask;
  std::vector<ThinStats> per(comps.boxes.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(comps.boxes.size()); ++k) {
    const auto cid = static_cast<std::int32_t>(k);
    const auto& b = comps.boxes[static_cast<std::size_t>(k)];
    thin_window(mask, elevation, b.r0, b.c0, b.r1 - b.r0 + 1, b.c1 - b.c0 + 1,
                [&](std::size_t g) { return comps.id[g] == cid; }, out, per[static_cast<std::size_t>(k)],
                RemovalObserver{});
  }
  if (stats) {
    *stats = {};
    for (const auto& s : per) {
      stats->removed += s.removed;
      stats->skeleton += s.skeleton;
      stats->stuck_interior += s.stuck_interior;
    }
  }
  return out;
}

}  // namespace waterline
