#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rmfg {

// SOLVER_THREADS if set and positive, else hardware concurrency
std::size_t solver_threads();

// runs body(i) for i in [0, n) on up to solver_threads() workers; the first
// exception (lowest index) is rethrown after all workers finish
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rmfg
