#include "lapdmd/kernels.hpp"

#include <cmath>
#include <numbers>
#include <type_traits>
#include <string>

#include "lapdmd/error.hpp"
#include "lapdmd/parallel.hpp"

namespace lapdmd {

namespace {

constexpr double kSeriesSwitch = 1e-4;
constexpr int kSeriesTerms = 8;

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw validation_error(std::string(what) + " must be positive and finite");
}

template <typename Vec>
void check_dims(const Vec& x, const Vec& z) {
  if (x.size() != z.size())
    throw validation_error("kernel: dimension mismatch (" + std::to_string(x.size()) +
                           " vs " + std::to_string(z.size()) + ")");
}

double exp_power_from_distance(double dist, double gamma, double sigma) {
  return std::exp(-std::pow(dist, gamma) / sigma);
}

// Kernel value between two columns without materializing copies.
template <typename A, typename B>
auto kernel_entry(const KernelSpec& k, const Eigen::MatrixBase<A>& a,
                  const Eigen::MatrixBase<B>& b) {
  using Scalar = typename A::Scalar;
  if (k.family == KernelFamily::HlSinh) {
    const cdouble inner = b.dot(a);
    const cdouble v = sinhc_sqrt(inner / (k.sigma * k.sigma));
    if constexpr (std::is_same_v<Scalar, double>)
      return v.real();
    else
      return v;
  } else {
    return Scalar(exp_power_from_distance((a - b).norm(), k.gamma, k.sigma));
  }
}

template <typename Mat>
Mat cross_gram_impl(const Mat& y, const Mat& x, const KernelSpec& k) {
  k.validate();
  if (y.cols() == 0 || x.cols() == 0 || y.rows() == 0)
    throw validation_error("gram: empty input");
  if (y.rows() != x.rows())
    throw validation_error("gram: state dimensions differ (" + std::to_string(y.rows()) +
                           " vs " + std::to_string(x.rows()) + ")");
  Mat out(y.cols(), x.cols());
  parallel_for(static_cast<std::size_t>(y.cols()), [&](std::size_t ii) {
    const auto i = static_cast<Eigen::Index>(ii);
    for (Eigen::Index j = 0; j < x.cols(); ++j) out(i, j) = kernel_entry(k, y.col(i), x.col(j));
  });
  return out;
}

// Fills the lower triangle from the upper one so symmetry is exact.
template <typename Mat>
Mat gram_impl(const Mat& x, const KernelSpec& k) {
  k.validate();
  if (x.cols() == 0 || x.rows() == 0) throw validation_error("gram: empty input");
  const Eigen::Index n = x.cols();
  Mat out(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const auto i = static_cast<Eigen::Index>(ii);
    for (Eigen::Index j = i; j < n; ++j) out(i, j) = kernel_entry(k, x.col(i), x.col(j));
  });
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      if constexpr (std::is_same_v<typename Mat::Scalar, double>)
        out(i, j) = out(j, i);
      else
        out(i, j) = std::conj(out(j, i));
    }
  return out;
}

}  // namespace

KernelSpec KernelSpec::parse(std::string_view name, double sigma) {
  KernelSpec k;
  if (name == "laplacian" || name == "laplace") {
    k = laplacian(sigma);
  } else if (name == "grbf" || name == "gaussian") {
    k = grbf(sigma);
  } else if (name == "hl" || name == "hl_sinh") {
    k = hl_sinh(sigma);
  } else if (name.substr(0, 4) == "exp:") {
    double gamma = 0.0;
    try {
      gamma = std::stod(std::string(name.substr(4)));
    } catch (const std::exception&) {
      throw validation_error("kernel: bad shape parameter in '" + std::string(name) + "'");
    }
    k = KernelSpec{KernelFamily::ExpPower, gamma, sigma};
  } else {
    throw validation_error("kernel: unknown kernel '" + std::string(name) + "'");
  }
  k.validate();
  return k;
}

std::string KernelSpec::name() const {
  if (family == KernelFamily::HlSinh) return "hl_sinh";
  if (gamma == 1.0) return "laplacian";
  if (gamma == 2.0) return "grbf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "exp:%.17g", gamma);
  return buf;
}

void KernelSpec::validate() const {
  check_positive(sigma, "kernel sigma");
  if (family == KernelFamily::ExpPower) check_positive(gamma, "kernel gamma");
}

double eval_exp_power(const Vector& x, const Vector& z, double gamma, double sigma) {
  check_positive(sigma, "sigma");
  check_positive(gamma, "gamma");
  check_dims(x, z);
  return exp_power_from_distance((x - z).norm(), gamma, sigma);
}

double eval_exp_power(const CVector& x, const CVector& z, double gamma, double sigma) {
  check_positive(sigma, "sigma");
  check_positive(gamma, "gamma");
  check_dims(x, z);
  return exp_power_from_distance((x - z).norm(), gamma, sigma);
}

cdouble sinhc_sqrt(cdouble u) {
  if (std::abs(u) < kSeriesSwitch) {
    // sum_{n<8} u^n / (2n+1)!, Horner form
    cdouble acc = 1.0;
    for (int n = kSeriesTerms - 1; n >= 1; --n)
      acc = 1.0 + acc * u / static_cast<double>((2 * n) * (2 * n + 1));
    return acc;
  }
  const cdouble s = std::sqrt(u);
  return std::sinh(s) / s;
}

double log_sinhc(double t) {
  if (t < 1e-2) return std::log(sinhc_sqrt(t * t).real());
  // sinh t / t = e^t (1 - e^-2t) / (2t)
  return t + std::log1p(-std::exp(-2.0 * t)) - std::log(2.0 * t);
}

cdouble eval_hl_kernel(const CVector& z, const CVector& w, double sigma) {
  check_positive(sigma, "sigma");
  check_dims(z, w);
  const cdouble inner = w.dot(z);  // sum z_i conj(w_i)
  return sinhc_sqrt(inner / (sigma * sigma));
}

cdouble eval_kernel(const KernelSpec& k, const CVector& x, const CVector& z) {
  if (k.family == KernelFamily::HlSinh) return eval_hl_kernel(x, z, k.sigma);
  return eval_exp_power(x, z, k.gamma, k.sigma);
}

double eval_kernel(const KernelSpec& k, const Vector& x, const Vector& z) {
  if (k.family == KernelFamily::HlSinh) {
    check_dims(x, z);
    return sinhc_sqrt(x.dot(z) / (k.sigma * k.sigma)).real();
  }
  return eval_exp_power(x, z, k.gamma, k.sigma);
}

Matrix gram_matrix(const Matrix& x, const KernelSpec& k) {
  return gram_impl<Matrix>(x, k);
}
CMatrix gram_matrix(const CMatrix& x, const KernelSpec& k) {
  return gram_impl<CMatrix>(x, k);
}
Matrix cross_gram(const Matrix& y, const Matrix& x, const KernelSpec& k) {
  if (y.cols() != x.cols()) throw validation_error("cross_gram: column counts differ");
  return cross_gram_impl<Matrix>(y, x, k);
}
CMatrix cross_gram(const CMatrix& y, const CMatrix& x, const KernelSpec& k) {
  if (y.cols() != x.cols()) throw validation_error("cross_gram: column counts differ");
  return cross_gram_impl<CMatrix>(y, x, k);
}

double spectral_density(SpectralFamily family, double s, double sigma, int dim) {
  check_positive(sigma, "sigma");
  if (!(s >= 0.0) || !std::isfinite(s))
    throw validation_error("spectral_density: frequency must be non-negative");
  if (dim < 1) throw validation_error("spectral_density: dimension must be positive");
  const double d = dim;
  if (family == SpectralFamily::SquaredExp)
    return std::pow(sigma * std::numbers::pi, d / 2.0) * std::exp(-std::numbers::pi * std::numbers::pi * sigma * sigma * s * s);
  const double nu = 0.5;
  const double log_prefactor = d * std::log(2.0) + (d / 2.0) * std::log(std::numbers::pi) +
                               std::lgamma(nu + d / 2.0) - std::lgamma(nu) - std::log(sigma);
  const double base = 1.0 / (sigma * sigma) + 4.0 * std::numbers::pi * std::numbers::pi * s * s;
  return std::exp(log_prefactor - (nu + d / 2.0) * std::log(base));
}

double matern_half_covariance(double r, double sigma) {
  check_positive(sigma, "sigma");
  if (!(r >= 0.0)) throw validation_error("matern_half_covariance: r must be non-negative");
  return std::exp(-r / sigma);
}

}  // namespace lapdmd
