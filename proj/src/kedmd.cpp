#include "lapdmd/kedmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lapdmd/error.hpp"
#include "lapdmd/io.hpp"

namespace lapdmd {

namespace {

constexpr double kMaxEigenvalueModulus = 1e3;

cdouble ipow(cdouble base, std::size_t exp) {
  cdouble result = 1.0;
  while (exp) {
    if (exp & 1U) result *= base;
    base *= base;
    exp >>= 1U;
  }
  return result;
}

std::string format_complex(cdouble v) {
  return format_double(v.real()) + (v.imag() < 0 ? "" : "+") + format_double(v.imag()) + "i";
}

}  // namespace

KedmdModel fit(const Matrix& x, const Matrix& y, const KernelSpec& k, const FitOptions& options) {
  k.validate();
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw validation_error("fit: X and Y must have the same shape");
  if (x.cols() < 2) throw validation_error("fit: need at least 2 snapshot pairs");
  if (x.rows() == 0) throw validation_error("fit: empty state");
  if (!x.allFinite() || !y.allFinite()) throw validation_error("fit: non-finite snapshot data");
  if (!(options.rank_tol >= 0.0)) throw validation_error("fit: rank_tol must be non-negative");
  if (options.max_rank && *options.max_rank == 0)
    throw validation_error("fit: max_rank must be positive");

  bool all_equal = true;
  for (Eigen::Index j = 1; j < x.cols() && all_equal; ++j)
    all_equal = (x.col(j).array() == x.col(0).array()).all();
  if (all_equal)
    throw numerical_error("fit: Gram rank zero after tolerance (all training states identical)");

  const Matrix gram = gram_matrix(x, k);
  if (gram.cwiseAbs().maxCoeff() == 0.0) throw numerical_error("fit: Gram matrix is numerically zero");
  const Matrix cross = cross_gram(y, x, k);

  Eigen::SelfAdjointEigenSolver<Matrix> sym(gram);
  if (sym.info() != Eigen::Success) throw numerical_error("fit: Gram eigendecomposition failed");

  // Eigen returns ascending eigenvalues; walk from the top.
  const Eigen::Index m = gram.rows();
  const double sigma_max = std::sqrt(std::max(0.0, sym.eigenvalues()(m - 1)));
  if (!(sigma_max > 0.0)) throw numerical_error("fit: Gram matrix is numerically zero");
  std::size_t rank = 0;
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    const double s = std::sqrt(std::max(0.0, sym.eigenvalues()(i)));
    if (!(s > options.rank_tol * sigma_max)) break;
    ++rank;
  }
  if (options.max_rank) rank = std::min(rank, *options.max_rank);
  if (rank == 0) throw numerical_error("fit: Gram rank zero after tolerance");

  KedmdModel model;
  model.kernel = k;
  model.rank = rank;
  const auto r = static_cast<Eigen::Index>(rank);
  model.feature_basis.resize(m, r);
  model.singular_values.resize(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    model.feature_basis.col(i) = sym.eigenvectors().col(m - 1 - i);
    model.singular_values(i) = std::sqrt(sym.eigenvalues()(m - 1 - i));
  }

  const Vector inv_s = model.singular_values.cwiseInverse();
  model.koopman_matrix = inv_s.asDiagonal() *
                         (model.feature_basis.transpose() * cross * model.feature_basis) *
                         inv_s.asDiagonal();

  Eigen::EigenSolver<Matrix> eig(model.koopman_matrix);
  if (eig.info() != Eigen::Success) throw numerical_error("fit: Koopman eigendecomposition failed");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const CVector raw_values = eig.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(raw_values(a)) > std::abs(raw_values(b));
  });
  model.eigenvalues.resize(r);
  model.eigvec_coeffs.resize(r, r);
  const CMatrix raw_vectors = eig.eigenvectors();
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto src = order[static_cast<std::size_t>(i)];
    model.eigenvalues(i) = raw_values(src);
    model.eigvec_coeffs.col(i) = raw_vectors.col(src);
    const cdouble lambda = raw_values(src);
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()) ||
        std::abs(lambda) > kMaxEigenvalueModulus)
      throw numerical_error("fit: spurious eigenvalue " + format_complex(lambda));
  }

  const CMatrix basis = model.feature_basis.cast<cdouble>();
  model.eigfun_values =
      basis * (model.singular_values.cast<cdouble>().asDiagonal() * model.eigvec_coeffs);
  model.eigfun_coeffs = basis * (inv_s.cast<cdouble>().asDiagonal() * model.eigvec_coeffs);

  const CMatrix target = x.transpose().cast<cdouble>();
  model.modes = model.eigfun_values.completeOrthogonalDecomposition().solve(target);
  model.mode_residual = (target - model.eigfun_values * model.modes).norm();

  model.x0 = x.col(0);
  model.training_states = x;
  return model;
}

Reconstruction reconstruct(const KedmdModel& model, std::size_t m) {
  if (model.rank == 0) throw validation_error("reconstruct: model is not fitted");
  CVector acc = CVector::Zero(model.modes.cols());
  for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(model.rank); ++n) {
    const cdouble lambda = model.eigenvalues(n);
    if (lambda != 0.0 && static_cast<double>(m) * std::log(std::abs(lambda)) > 700.0)
      throw numerical_error("reconstruct: lambda^" + std::to_string(m) + " overflows for eigenvalue " +
                            std::to_string(n) + " = " + format_complex(lambda));
    const cdouble coeff = ipow(lambda, m) * model.eigfun_values(0, n);
    acc += coeff * model.modes.row(n).transpose();
  }
  Reconstruction out;
  out.values = acc.real();
  out.imag_norm = acc.imag().norm();
  if (!out.values.allFinite()) throw numerical_error("reconstruct: non-finite reconstruction");
  return out;
}

cdouble eval_eigenfunction(const KedmdModel& model, std::size_t n, const CVector& x) {
  if (n >= model.rank)
    throw validation_error("eval_eigenfunction: index " + std::to_string(n) + " >= rank " +
                           std::to_string(model.rank));
  if (x.size() != model.training_states.rows())
    throw validation_error("eval_eigenfunction: state dimension mismatch");
  cdouble sum = 0.0;
  const auto col = static_cast<Eigen::Index>(n);
  for (Eigen::Index j = 0; j < model.training_states.cols(); ++j)
    sum += eval_kernel(model.kernel, x, CVector(model.training_states.col(j).cast<cdouble>())) *
           model.eigfun_coeffs(j, col);
  return sum;
}

cdouble eval_eigenfunction(const KedmdModel& model, std::size_t n, const Vector& x) {
  return eval_eigenfunction(model, n, CVector(x.cast<cdouble>()));
}

std::vector<std::size_t> dominant_filter(const KedmdModel& model, double tol) {
  if (!(tol > 0.0)) throw validation_error("dominant_filter: tol must be positive");
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < model.rank; ++n)
    if (std::abs(model.eigenvalues(static_cast<Eigen::Index>(n)).real() - 1.0) <= tol)
      out.push_back(n);
  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(model.eigenvalues(static_cast<Eigen::Index>(a))) >
           std::abs(model.eigenvalues(static_cast<Eigen::Index>(b)));
  });
  return out;
}

}  // namespace lapdmd
