#pragma once

#include <cstddef>
#include <functional>

namespace fgrlab {

// worker count: FGRLAB_THREADS if set and positive, else hardware concurrency
unsigned thread_count();

// runs body(i) for i in [0, n); each index is visited exactly once
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fgrlab
