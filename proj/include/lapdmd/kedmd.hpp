#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lapdmd/kernels.hpp"
#include "lapdmd/types.hpp"

namespace lapdmd {

struct FitOptions {
  double rank_tol = 1e-8;
  std::optional<std::size_t> max_rank;
};

/// Finite-rank Koopman representation fitted by kernel EDMD.
///
/// With G = Q S^2 Q^T the Gram matrix of the training states and A the
/// cross Gram matrix k(y_i, x_j), the retained r directions give
///   K = S_r^-1 Q_r^T A Q_r S_r^-1,   K V = V diag(lambda).
/// Eigenfunction values on the training states are Phi = Q_r S_r V and the
/// modes W solve X^T ~ Phi W in the least-squares sense.
struct KedmdModel {
  KernelSpec kernel;
  std::size_t rank = 0;
  CVector eigenvalues;          // r, sorted by modulus, descending
  CMatrix eigvec_coeffs;        // V, r x r
  Matrix koopman_matrix;        // K, r x r
  Matrix feature_basis;         // Q_r, (M-1) x r
  Vector singular_values;       // diag(S_r)
  CMatrix eigfun_values;        // Phi, (M-1) x r
  CMatrix eigfun_coeffs;        // Q_r S_r^-1 V, (M-1) x r
  CMatrix modes;                // W, r x N; row n is mode c_n
  Vector x0;                    // first training state
  Matrix training_states;       // D x (M-1)
  double mode_residual = 0.0;   // |X^T - Phi W|_F

  std::size_t state_dim() const { return static_cast<std::size_t>(x0.size()); }
};

/// x and y are D x (M-1) with y_i the successor of x_i.
KedmdModel fit(const Matrix& x, const Matrix& y, const KernelSpec& k,
               const FitOptions& options = {});

struct Reconstruction {
  Vector values;
  double imag_norm = 0.0;  // |Im(sum c_n lambda_n^m zeta_n(x0))|_2
};

/// Re(sum_n c_n lambda_n^m zeta_n(x0)).
Reconstruction reconstruct(const KedmdModel& model, std::size_t m);

/// zeta_n(x) = sum_j k(x, x_j) (Q_r S_r^-1 V)_{j n}.
cdouble eval_eigenfunction(const KedmdModel& model, std::size_t n, const CVector& x);
cdouble eval_eigenfunction(const KedmdModel& model, std::size_t n, const Vector& x);

/// Indices with |Re(lambda) - 1| <= tol ordered by |lambda| descending,
/// ties by index.
std::vector<std::size_t> dominant_filter(const KedmdModel& model, double tol);

}  // namespace lapdmd
