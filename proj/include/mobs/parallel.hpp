#pragma once

#include <Eigen/Core>

#include <functional>

namespace mobs {

// Runs fn(i) for i in [0, count) on up to `threads` workers pulling from an
// atomic counter.  Results must be written to disjoint slots; determinism
// then requires only that each fn(i) be a pure function of i.  threads <= 1
// runs inline.  The first exception thrown by any worker is rethrown.
void parallel_for(Eigen::Index count, int threads,
                  const std::function<void(Eigen::Index)>& fn);

}  // namespace mobs
