#pragma once

#include "medml/core/dataset.hpp"
#include "medml/core/rng.hpp"

#include <vector>

namespace medml {

// Partition of {0, ..., n-1} into L folds of sizes differing by at most one.
struct FoldAssignment {
  Index n = 0;
  int folds = 1;
  std::vector<int> labels;

  std::vector<Index> members(int fold) const;
  std::vector<Index> complement(int fold) const;
  Index size(int fold) const;
};

// Fisher-Yates shuffle under `rng`, then round-robin dealing. With L = 1
// every label is 0 and the training set of the single fold is the full
// sample.
FoldAssignment kfold_split(Index n, int folds, RngStream rng);

}  // namespace medml
