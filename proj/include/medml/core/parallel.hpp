#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace medml {

// Runs body(i) for i in [0, count) on up to `workers` threads. Returns one
// exception slot per index (null when body(i) succeeded). Results are
// expected to be written by index, so the outcome never depends on the
// schedule.
std::vector<std::exception_ptr> parallel_for(std::size_t count, int workers,
                                             const std::function<void(std::size_t)>& body);

// Worker count from an explicit request (> 0), else MEDML_THREADS, else 1.
int resolve_parallelism(int requested);

}  // namespace medml
