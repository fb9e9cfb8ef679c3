#include "medml/core/folds.hpp"

#include "medml/core/errors.hpp"

#include <numeric>
#include <utility>

namespace medml {

std::vector<Index> FoldAssignment::members(int fold) const {
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] == fold) out.push_back(i);
  }
  return out;
}

std::vector<Index> FoldAssignment::complement(int fold) const {
  if (folds == 1) return members(0);
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] != fold) out.push_back(i);
  }
  return out;
}

Index FoldAssignment::size(int fold) const {
  Index count = 0;
  for (int label : labels) count += (label == fold);
  return count;
}

FoldAssignment kfold_split(Index n, int folds, RngStream rng) {
  if (folds < 1 || n < 1 || folds > n) {
    throw ArgumentError("kfold_split: need 1 <= L <= n, got L=" + std::to_string(folds) +
                        ", n=" + std::to_string(n));
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  FoldAssignment out{n, folds, std::vector<int>(static_cast<std::size_t>(n), 0)};
  for (Index k = 0; k < n; ++k) {
    out.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] =
        static_cast<int>(k % folds);
  }
  return out;
}

}  // namespace medml
