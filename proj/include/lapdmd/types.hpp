#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lapdmd {

using cdouble = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Snapshot matrix: rows are spatial sensors, columns are time snapshots
/// taken at a uniform interval `dt`.
struct DataMatrix {
  Matrix values;
  double dt = 1.0;
  std::vector<std::string> space_labels;
  std::vector<std::string> time_labels;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

  /// Throws a validation error unless every entry is finite, dt > 0 and
  /// there are at least two snapshots.
  void validate() const;
};

}  // namespace lapdmd
