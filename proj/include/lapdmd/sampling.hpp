#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lapdmd/types.hpp"

namespace lapdmd {

/// permutation[k] is the original column now at position k.
using Permutation = std::vector<std::size_t>;

struct ShuffleResult {
  DataMatrix matrix;
  Permutation permutation;
};

/// Seeded Fisher-Yates shuffle of the snapshot columns.
ShuffleResult shuffle_columns(const DataMatrix& m, std::uint64_t seed);

/// Puts shuffled columns back in their original positions.
DataMatrix unshuffle_columns(const DataMatrix& m, const Permutation& permutation);

/// Keeps the first n_keep columns in their current order.
DataMatrix take_partial(const DataMatrix& m, std::size_t n_keep);

/// Column-major flatten, truncate to rows * cols elements, and refold.
DataMatrix reshape_series(const DataMatrix& m, std::size_t rows, std::size_t cols);

struct SnapshotPairs {
  Matrix x;  // columns 0 .. M-2
  Matrix y;  // columns 1 .. M-1
};

/// Successor pairs by adjacency in the provided column order.
SnapshotPairs build_pairs(const DataMatrix& m);

struct SamplingPlan {
  std::uint64_t seed = 0;
  std::size_t n_keep = 0;
  bool shuffle = true;
  std::optional<std::pair<std::size_t, std::size_t>> reshape;

  void validate(const DataMatrix& target) const;
};

struct SampledData {
  DataMatrix matrix;        // what the fit sees
  Permutation permutation;  // identity when shuffle is off
};

/// shuffle -> take_partial -> reshape, in that order.
SampledData apply_plan(const DataMatrix& m, const SamplingPlan& plan);

}  // namespace lapdmd
