#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lapdmd/rng.hpp"
#include "lapdmd/types.hpp"

namespace lapdmd {

/// Seeded Monte-Carlo context over the Laplacian measure
///   dmu(z) = (2 pi sigma^2)^-D exp(-|z|_2 / sigma) dV(z),  z in C^D.
///
/// Samples are generated in chunks of `chunk_size`; chunk c draws from its
/// own stream seeded by stream_seed(seed, c) and partial sums are reduced in
/// chunk order, so estimates do not depend on the worker count.
///
/// `proposal_scale` >= 1 widens the radial proposal to
/// Gamma(2D, proposal_scale * sigma) and attaches the likelihood ratio as a
/// sample weight. A value of 1 draws exactly from the normalized measure.
struct McIntegrator {
  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = 0;
  double sigma = 1.0;
  int dim = 1;
  std::size_t chunk_size = 1 << 14;
  double proposal_scale = 2.0;

  std::size_t chunk_count() const { return (n_samples + chunk_size - 1) / chunk_size; }
  void validate() const;
};

/// Affine symbol phi(z) = a z + b with a invertible and 0 < |a|_F < 1.
struct AffineMap {
  CMatrix a;
  CVector b;

  static AffineMap scalar(cdouble a, cdouble b = 0.0);
  static AffineMap diagonal(const CVector& diag);

  int dim() const { return static_cast<int>(a.rows()); }
  CVector apply(const CVector& z) const { return a * z + b; }
  /// phi^m(x0) = a^m x0 + (sum_{i<m} a^i) b.
  CVector iterate(const CVector& x0, int m) const;

  /// Empty string when valid, otherwise the violated condition.
  std::string violation() const;
  void validate() const;
};

/// Observable on C^D with a label.
struct HlFunction {
  std::function<cdouble(const CVector&)> eval;
  std::string description;

  cdouble operator()(const CVector& z) const { return eval(z); }
};

struct WeightedSample {
  CVector z;
  double weight = 1.0;
};

/// Monte-Carlo estimate with the standard error of the mean.
struct McEstimate {
  cdouble value;
  double std_error = 0.0;
  std::size_t n = 0;
};

double measure_density(const CVector& z, double sigma);

/// Total mass of the Laplacian measure on C^D: 2 Gamma(2D) / (2^D Gamma(D)).
/// Equals 1 for D = 1.
double measure_mass(int dim);

/// Streaming sampler for one chunk of an McIntegrator.
class MeasureSampler {
 public:
  MeasureSampler(const McIntegrator& ctx, std::size_t chunk);
  WeightedSample next();

 private:
  const McIntegrator& ctx_;
  Rng rng_;
};

/// Materializes every sample of ctx in order. Intended for small contexts;
/// integrators stream through MeasureSampler instead.
std::vector<WeightedSample> sample_measure(const McIntegrator& ctx);

/// Estimates the integral of `integrand` against the measure normalized to
/// unit mass (the raw measure already has unit mass for D = 1).
/// A non-finite integrand value raises a numerical error naming the sample.
McEstimate mc_integrate(const McIntegrator& ctx,
                        const std::function<cdouble(const CVector&)>& integrand);

/// <f, g> = integral of f conj(g) dmu.
McEstimate mc_inner_product(const HlFunction& f, const HlFunction& g,
                            const McIntegrator& ctx);

/// e_n(z) = z^n / (sigma^n sqrt((2n+1)!)), orthonormal for D = 1.
HlFunction orthonormal_basis_1d(int n, double sigma);

/// K^sigma(., w) as an observable.
HlFunction hl_kernel_section(const CVector& w, double sigma);

/// |sum_{n<n_terms} e_n(z) conj(e_n(w)) - K^sigma(z, w)|.
double kernel_series_check(cdouble z, cdouble w, double sigma, int n_terms);

/// Norm of the Laplacian kernel section exp(-|. - x|_2 / sigma) under the
/// measure; std_error propagated from the squared-norm estimate.
struct NormEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // 3^-D exp(|x|_2 / sigma)
};
NormEstimate laplacian_kernel_norm(const CVector& x, const McIntegrator& ctx);

/// K(phi(z), phi(z)) / K(z, z) for the sinh reproducing kernel.
double pi_statistic(const CVector& z, const AffineMap& phi, double sigma);

struct HlProbeSequence {
  int basis_index = 0;
  std::vector<double> image_norms;  // |K_phi g_m|, m = 1..m_max
  std::vector<double> ratios;       // |K_phi g_m| / |g_m|
};

struct HlProbeReport {
  std::vector<HlProbeSequence> sequences;  // g_m = e_0 / m and e_1 / m
  double change_of_variables_bound = 0.0;  // |det a_R|^-1 exp(|b| / (|a|_F sigma))
  std::string verdict;                     // "bounded" or "unbounded"

  std::string serialize() const;
};

HlProbeReport closability_probe_hl(const AffineMap& phi, int m_max,
                                   const McIntegrator& ctx);

/// exp(sigma^2 sum |Im z_i|^2), the weight of the Gaussian-RBF function space.
double grbf_weight(const CVector& z, double sigma);

/// Holomorphic extension of the Gaussian RBF kernel section at a real
/// center: exp(-sum (z_i - c_i)^2 / sigma).
HlFunction grbf_kernel_section(const CVector& center, double sigma);

struct GrbfProbeReport {
  std::vector<double> radii;
  std::vector<double> norms;
  std::vector<double> std_errors;
  double final_ratio = 0.0;
  std::string verdict;  // "divergent" or "convergent"

  std::string serialize() const;
};

/// Truncated-ball norms |K_phi g|_{sigma,R} over increasing radii.
GrbfProbeReport closability_probe_grbf(const AffineMap& phi,
                                       const std::vector<double>& radii,
                                       const McIntegrator& ctx,
                                       const HlFunction& g);
/// Uses g = grbf_kernel_section(0, sigma).
GrbfProbeReport closability_probe_grbf(const AffineMap& phi,
                                       const std::vector<double>& radii,
                                       const McIntegrator& ctx);

}  // namespace lapdmd
