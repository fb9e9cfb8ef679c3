#include "medml/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

namespace medml {

std::vector<std::exception_ptr> parallel_for(std::size_t count, int workers,
                                             const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count <= 1) {
    run();
    return errors;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(threads, count); ++w) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  return errors;
}

int resolve_parallelism(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MEDML_THREADS")) {
    try {
      const int value = std::stoi(env);
      if (value > 0) return value;
    } catch (...) {
    }
  }
  return 1;
}

}  // namespace medml
