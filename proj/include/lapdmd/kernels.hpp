#pragma once

#include <string>
#include <string_view>

#include "lapdmd/types.hpp"

namespace lapdmd {

enum class KernelFamily { ExpPower, HlSinh };

/// Kernel selector. ExpPower is exp(-|x - z|^gamma / sigma): gamma = 1 is
/// the Laplacian kernel, gamma = 2 the Gaussian RBF. HlSinh is the
/// reproducing kernel sinh(sqrt(u)) / sqrt(u), u = <z, w> / sigma^2, of the
/// space square-integrable under the Laplacian measure.
struct KernelSpec {
  KernelFamily family = KernelFamily::ExpPower;
  double gamma = 1.0;
  double sigma = 1.0;

  static KernelSpec laplacian(double sigma) { return {KernelFamily::ExpPower, 1.0, sigma}; }
  static KernelSpec grbf(double sigma) { return {KernelFamily::ExpPower, 2.0, sigma}; }
  static KernelSpec hl_sinh(double sigma) { return {KernelFamily::HlSinh, 1.0, sigma}; }

  /// Accepts "laplacian", "grbf", "hl" / "hl_sinh", or "exp:<gamma>".
  static KernelSpec parse(std::string_view name, double sigma);

  /// Inverse of parse().
  std::string name() const;

  void validate() const;
};

double eval_exp_power(const Vector& x, const Vector& z, double gamma, double sigma);
double eval_exp_power(const CVector& x, const CVector& z, double gamma, double sigma);

/// sinh(sqrt(u)) / sqrt(u) as an entire function of u. Uses the power series
/// below |u| = 1e-4 and the principal-root closed form elsewhere.
cdouble sinhc_sqrt(cdouble u);

/// log(sinh(t) / t) for t >= 0, finite for arbitrarily large t.
double log_sinhc(double t);

cdouble eval_hl_kernel(const CVector& z, const CVector& w, double sigma);

/// Kernel value between two states; HlSinh returns the real part when both
/// arguments are real (the value is then real).
cdouble eval_kernel(const KernelSpec& k, const CVector& x, const CVector& z);
double eval_kernel(const KernelSpec& k, const Vector& x, const Vector& z);

/// Entry (i, j) = k(x_i, x_j) over the columns of X.
Matrix gram_matrix(const Matrix& x, const KernelSpec& k);
CMatrix gram_matrix(const CMatrix& x, const KernelSpec& k);

/// Entry (i, j) = k(y_i, x_j).
Matrix cross_gram(const Matrix& y, const Matrix& x, const KernelSpec& k);
CMatrix cross_gram(const CMatrix& y, const CMatrix& x, const KernelSpec& k);

enum class SpectralFamily { SquaredExp, Exponential };

/// Spectral density in D dimensions at frequency magnitude s.
double spectral_density(SpectralFamily family, double s, double sigma, int dim);

/// Matern covariance with nu = 1/2: exp(-r / sigma).
double matern_half_covariance(double r, double sigma);

}  // namespace lapdmd
