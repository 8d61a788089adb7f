#pragma once

#include <cstddef>
#include <vector>

#include "lapdmd/kedmd.hpp"
#include "lapdmd/rkhs.hpp"
#include "lapdmd/types.hpp"

namespace lapdmd {

struct EweReport {
  Matrix per_element;  // masked entries hold 0
  double mean = 0.0;
  double max = 0.0;
  std::size_t masked_count = 0;
};

/// Element-wise error N^-1 |1 - F / A|, N the number of compared entries.
/// Entries with |A| <= zero_tol are masked out of mean and max.
EweReport ewe(const Matrix& reconstructed, const Matrix& actual, double zero_tol = 1e-12);

struct ModeDifferenceReport {
  std::size_t m = 0;
  std::vector<CVector> partial_sums;  // entry N-1 holds the sum over n < N
  std::vector<double> norms;          // |partial_sums[i]|_2
  CVector converged_value;
};

/// Partial sums of sum_n c_n [lambda_n^m zeta_n(x0) - zeta_n(phi^m(x0))].
ModeDifferenceReport mode_difference(const KedmdModel& model, const AffineMap& phi,
                                     std::size_t m, std::size_t n_terms);

/// mode_difference gated on the faithfulness conditions of phi.
ModeDifferenceReport faithful_difference(const KedmdModel& model, const AffineMap& phi,
                                         std::size_t m, std::size_t n_terms);

struct SpectralBounds {
  double lower = 0.0;
  double upper = 0.0;
  double epsilon = 0.0;
  double identity_value = 0.0;  // D + |a|_F^2 - 2 Re tr(a) = |I - a|_F^2
};

SpectralBounds spectral_bounds(double g_norm, double x_norm, const CMatrix& a,
                               double v_rho);

}  // namespace lapdmd
