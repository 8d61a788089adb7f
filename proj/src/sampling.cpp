#include "lapdmd/sampling.hpp"

#include <numeric>
#include <string>

#include "lapdmd/error.hpp"
#include "lapdmd/rng.hpp"

namespace lapdmd {

namespace {

DataMatrix with_columns(const DataMatrix& m, const Permutation& order) {
  DataMatrix out;
  out.dt = m.dt;
  out.space_labels = m.space_labels;
  out.values.resize(m.values.rows(), static_cast<Eigen::Index>(order.size()));
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.values.col(static_cast<Eigen::Index>(k)) =
        m.values.col(static_cast<Eigen::Index>(order[k]));
    if (!m.time_labels.empty()) out.time_labels.push_back(m.time_labels[order[k]]);
  }
  return out;
}

}  // namespace

ShuffleResult shuffle_columns(const DataMatrix& m, std::uint64_t seed) {
  Permutation perm(m.cols());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(mix_seed(seed));
  for (std::size_t i = perm.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return {with_columns(m, perm), perm};
}

DataMatrix unshuffle_columns(const DataMatrix& m, const Permutation& permutation) {
  if (permutation.size() != m.cols())
    throw validation_error("unshuffle: permutation length does not match column count");
  Permutation inverse(permutation.size(), permutation.size());
  for (std::size_t k = 0; k < permutation.size(); ++k) {
    if (permutation[k] >= permutation.size() || inverse[permutation[k]] != permutation.size())
      throw validation_error("unshuffle: not a permutation");
    inverse[permutation[k]] = k;
  }
  return with_columns(m, inverse);
}

DataMatrix take_partial(const DataMatrix& m, std::size_t n_keep) {
  if (n_keep < 1 || n_keep > m.cols())
    throw validation_error("take_partial: n_keep = " + std::to_string(n_keep) +
                           " outside [1, " + std::to_string(m.cols()) + "]");
  DataMatrix out;
  out.dt = m.dt;
  out.space_labels = m.space_labels;
  out.values = m.values.leftCols(static_cast<Eigen::Index>(n_keep));
  if (!m.time_labels.empty())
    out.time_labels.assign(m.time_labels.begin(),
                           m.time_labels.begin() + static_cast<std::ptrdiff_t>(n_keep));
  return out;
}

DataMatrix reshape_series(const DataMatrix& m, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw validation_error("reshape_series: empty target shape");
  const std::size_t total = static_cast<std::size_t>(m.values.size());
  if (rows * cols > total)
    throw validation_error("reshape_series: target " + std::to_string(rows) + "x" +
                           std::to_string(cols) + " exceeds " + std::to_string(total) +
                           " source elements");
  DataMatrix out;
  out.dt = m.dt;
  // Eigen storage is column-major, so a flat copy is the column-major flatten.
  out.values = Eigen::Map<const Matrix>(m.values.data(), static_cast<Eigen::Index>(rows),
                                        static_cast<Eigen::Index>(cols));
  return out;
}

SnapshotPairs build_pairs(const DataMatrix& m) {
  if (m.cols() < 2) throw validation_error("build_pairs: need at least 2 snapshots");
  const Eigen::Index n = m.values.cols() - 1;
  return {m.values.leftCols(n), m.values.rightCols(n)};
}

void SamplingPlan::validate(const DataMatrix& target) const {
  if (n_keep < 1 || n_keep > target.cols())
    throw validation_error("sampling: n_keep = " + std::to_string(n_keep) + " outside [1, " +
                           std::to_string(target.cols()) + "]");
  if (reshape) {
    const auto [r, c] = *reshape;
    if (r == 0 || c == 0) throw validation_error("sampling: empty reshape target");
    if (r * c > target.rows() * n_keep)
      throw validation_error("sampling: reshape " + std::to_string(r) + "x" + std::to_string(c) +
                             " exceeds retained element count");
  }
}

SampledData apply_plan(const DataMatrix& m, const SamplingPlan& plan) {
  plan.validate(m);
  SampledData out;
  if (plan.shuffle) {
    auto shuffled = shuffle_columns(m, plan.seed);
    out.matrix = std::move(shuffled.matrix);
    out.permutation = std::move(shuffled.permutation);
  } else {
    out.matrix = m;
    out.permutation.resize(m.cols());
    std::iota(out.permutation.begin(), out.permutation.end(), std::size_t{0});
  }
  out.matrix = take_partial(out.matrix, plan.n_keep);
  if (plan.reshape) out.matrix = reshape_series(out.matrix, plan.reshape->first, plan.reshape->second);
  return out;
}

}  // namespace lapdmd
