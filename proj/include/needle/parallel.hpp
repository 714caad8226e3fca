#pragma once

#include <cstddef>
#include <functional>

namespace needle {

/// Worker count: hardware concurrency, capped by NEEDLE_GEOM_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, count). Each index is visited exactly once; the
/// caller owns any per-index output slot, so results do not depend on the
/// schedule.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace needle
