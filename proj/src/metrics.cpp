#include "lapdmd/metrics.hpp"

#include <cmath>
#include <string>

#include "lapdmd/error.hpp"

namespace lapdmd {

EweReport ewe(const Matrix& reconstructed, const Matrix& actual, double zero_tol) {
  if (reconstructed.rows() != actual.rows() || reconstructed.cols() != actual.cols())
    throw validation_error("ewe: shape mismatch (" + std::to_string(reconstructed.rows()) + "x" +
                           std::to_string(reconstructed.cols()) + " vs " +
                           std::to_string(actual.rows()) + "x" + std::to_string(actual.cols()) +
                           ")");
  if (!(zero_tol >= 0.0)) throw validation_error("ewe: zero_tol must be non-negative");

  EweReport report;
  report.per_element = Matrix::Zero(actual.rows(), actual.cols());
  const double n = static_cast<double>(actual.size());
  double sum = 0.0;
  std::size_t counted = 0;
  for (Eigen::Index j = 0; j < actual.cols(); ++j)
    for (Eigen::Index i = 0; i < actual.rows(); ++i) {
      const double a = actual(i, j);
      if (std::abs(a) <= zero_tol) {
        ++report.masked_count;
        continue;
      }
      const double e = std::abs(1.0 - reconstructed(i, j) / a) / n;
      report.per_element(i, j) = e;
      sum += e;
      report.max = std::max(report.max, e);
      ++counted;
    }
  report.mean = counted ? sum / static_cast<double>(counted) : 0.0;
  return report;
}

ModeDifferenceReport mode_difference(const KedmdModel& model, const AffineMap& phi,
                                     std::size_t m, std::size_t n_terms) {
  phi.validate();
  if (n_terms < 1 || n_terms > model.rank)
    throw validation_error("mode_difference: n_terms must be in [1, " +
                           std::to_string(model.rank) + "]");
  if (static_cast<std::size_t>(phi.dim()) != model.state_dim())
    throw validation_error("mode_difference: affine map dimension does not match the model");

  const CVector x0 = model.x0.cast<cdouble>();
  const CVector moved = phi.iterate(x0, static_cast<int>(m));

  ModeDifferenceReport report;
  report.m = m;
  CVector acc = CVector::Zero(model.modes.cols());
  for (std::size_t n = 0; n < n_terms; ++n) {
    const auto i = static_cast<Eigen::Index>(n);
    cdouble term = 0.0;
    if (m != 0) {
      const cdouble data_side = std::pow(model.eigenvalues(i), static_cast<double>(m)) *
                                model.eigfun_values(0, i);
      term = data_side - eval_eigenfunction(model, n, moved);
    }
    acc += term * model.modes.row(i).transpose();
    report.partial_sums.push_back(acc);
    report.norms.push_back(acc.norm());
  }
  report.converged_value = report.partial_sums.back();
  return report;
}

ModeDifferenceReport faithful_difference(const KedmdModel& model, const AffineMap& phi,
                                         std::size_t m, std::size_t n_terms) {
  if (const auto why = phi.violation(); !why.empty())
    throw validation_error("faithful_difference: affine map is not faithful: " + why);
  return mode_difference(model, phi, m, n_terms);
}

SpectralBounds spectral_bounds(double g_norm, double x_norm, const CMatrix& a, double v_rho) {
  if (!(g_norm > 0.0) || !(x_norm > 0.0))
    throw validation_error("spectral_bounds: norms must be positive");
  if (!(v_rho > 0.0 && v_rho <= 1.0))
    throw validation_error("spectral_bounds: v_rho must lie in (0, 1]");
  if (a.rows() == 0 || a.rows() != a.cols() || !a.allFinite())
    throw validation_error("spectral_bounds: a must be a finite square matrix");

  const double d = static_cast<double>(a.rows());
  const double re_trace = a.trace().real();
  const double gap = d + 1.0 - 2.0 * re_trace;
  if (!(gap > 0.0)) throw validation_error("spectral_bounds: degenerate bound (D + 1 - 2 Re tr(a) <= 0)");

  SpectralBounds out;
  out.identity_value = d + a.squaredNorm() - 2.0 * re_trace;
  out.lower = g_norm * v_rho * x_norm * std::sqrt(gap);
  out.upper = g_norm * x_norm * std::sqrt(d + 1.0);
  out.epsilon = (d + 1.0) / gap;
  return out;
}

}  // namespace lapdmd
