#pragma once

#include <cstddef>
#include <functional>

#include "waterline/raster.hpp"

namespace waterline {

/// Thinning label of a waterway cell.
enum class CellState {
  Skeleton,   ///< endpoint (<= 1 neighbour) or removal would split the waterway
  Interior,   ///< removal would punch a hole in the waterway
  Removable,  ///< simple point
};

/// Classifies foreground cell (r, c) from its 3x3 neighbourhood, with 8-connected
/// foreground and 4-connected background. Throws InputError for background cells.
CellState classify_cell(const BinaryMask& mask, std::size_t r, std::size_t c);

struct ThinStats {
  std::size_t removed = 0;
  std::size_t skeleton = 0;
  /// Interior cells that never became removable. Kept in the output.
  std::size_t stuck_interior = 0;
};

/// Invoked just before a cell is removed; `current` is the working mask with
/// the cell still set.
using RemovalObserver = std::function<void(Cell removed, const BinaryMask& current)>;

struct ThinOptions {
  RemovalObserver observer;  ///< forces the serial path when set
};

/// Elevation-prioritised topology-preserving thinning. Removable cells are
/// deleted highest elevation first (ties by row-major index), re-classifying
/// the 8-neighbourhood after each removal, until none remain. Nodata
/// elevations sort below every valid elevation. Independent 8-connected
/// components are thinned in parallel.
BinaryMask thin(const BinaryMask& mask, const RealGrid& elevation, ThinStats* stats = nullptr,
                const ThinOptions& options = {});

namespace serial {
/// Single global priority queue over the whole grid.
BinaryMask thin(const BinaryMask& mask, const RealGrid& elevation, ThinStats* stats = nullptr,
                const ThinOptions& options = {});
}  // namespace serial

}  // namespace waterline
