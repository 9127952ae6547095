#pragma once

#include <string>
#include <vector>

#include "waterline/raster.hpp"
#include "waterline/vectorize.hpp"

namespace waterline {

/// Per-segment record of how an order was reached, indexed like
/// WaterwayGraph::segments.
struct OrderTrace {
  std::vector<int> merged_order;                      ///< before the cycle floor
  std::vector<std::vector<std::size_t>> tributaries;  ///< segment positions
  std::vector<std::size_t> visit_order;               ///< traversal sequence
};

/// Modified Strahler ordering for graphs that need not be trees.
///
/// Segments are visited by descending elevation of their higher endpoint
/// (then lower endpoint, then geometry, so ids never matter). A segment's
/// tributaries are the already-ordered segments touching its upstream node,
/// i.e. the higher endpoint, or both endpoints when they are level. With no
/// tributaries the order is 1; otherwise it is the tributary maximum n, or
/// n + 1 when at least two tributaries share n. Finally every segment whose
/// two end nodes each have degree >= 2 is raised to at least 2.
///
/// Elevations are sampled at the cells under segment endpoints; a missing or
/// nodata sample throws InputError.
WaterwayGraph assign_orders(const WaterwayGraph& graph, const RealGrid& elevation,
                            OrderTrace* trace = nullptr);

enum class OrderCategory { O1, O2, O3plus };

OrderCategory order_category(int order);
std::string category_name(OrderCategory c);

}  // namespace waterline
