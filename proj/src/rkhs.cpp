#include "lapdmd/rkhs.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "lapdmd/error.hpp"
#include "lapdmd/io.hpp"
#include "lapdmd/kernels.hpp"
#include "lapdmd/parallel.hpp"

namespace lapdmd {

namespace {

constexpr std::size_t kMinVerdictSamples = 10'000;
constexpr std::uint64_t kBallStreamSalt = 0x6a09e667f3bcc909ULL;

// Fills `dir` with a uniformly distributed unit vector of R^{2D}, stored as
// D complex coordinates.
void draw_direction(Rng& rng, CVector& dir) {
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (Eigen::Index i = 0; i < dir.size(); ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      dir(i) = cdouble(re, im);
      norm2 += re * re + im * im;
    }
  } while (norm2 == 0.0);
  dir /= std::sqrt(norm2);
}

// Draws one proposal sample into z and returns its likelihood-ratio weight.
double draw_measure_sample(const McIntegrator& ctx, Rng& rng, CVector& z) {
  const int shape = 2 * ctx.dim;
  const double scale = ctx.sigma * ctx.proposal_scale;
  double log_sum = 0.0;
  for (int i = 0; i < shape; ++i) log_sum += std::log(rng.uniform_open());
  const double r = -scale * log_sum;
  draw_direction(rng, z);
  z *= r;
  if (ctx.proposal_scale == 1.0) return 1.0;
  const double tau = ctx.proposal_scale;
  return std::pow(tau, shape) * std::exp(-(r / ctx.sigma) * (1.0 - 1.0 / tau));
}

struct ChunkSums {
  cdouble sum{0.0, 0.0};
  double sum_sq = 0.0;
};

// Mean of `value(rng, z)` over ctx.n_samples draws, where `value` draws its
// own point into z. Chunks run in parallel and are reduced in index order.
template <typename Value>
McEstimate chunked_mean(const McIntegrator& ctx, std::uint64_t salt, const char* what,
                        const Value& value) {
  const std::size_t chunks = ctx.chunk_count();
  std::vector<ChunkSums> sums(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(stream_seed(ctx.seed ^ salt, c));
    CVector z(ctx.dim);
    const std::size_t begin = c * ctx.chunk_size;
    const std::size_t end = std::min(ctx.n_samples, begin + ctx.chunk_size);
    ChunkSums acc;
    for (std::size_t k = begin; k < end; ++k) {
      const cdouble v = value(rng, z);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        std::ostringstream msg;
        msg << what << ": non-finite value at sample " << k << " (chunk " << c << "), z = [";
        for (Eigen::Index i = 0; i < z.size(); ++i)
          msg << (i ? ", " : "") << format_double(z(i).real()) << (z(i).imag() < 0 ? "" : "+")
              << format_double(z(i).imag()) << "i";
        msg << "]";
        throw numerical_error(msg.str());
      }
      acc.sum += v;
      acc.sum_sq += std::norm(v);
    }
    sums[c] = acc;
  });

  ChunkSums total;
  for (const auto& s : sums) {
    total.sum += s.sum;
    total.sum_sq += s.sum_sq;
  }
  const double n = static_cast<double>(ctx.n_samples);
  McEstimate est;
  est.n = ctx.n_samples;
  est.value = total.sum / n;
  if (ctx.n_samples > 1) {
    const double var = std::max(0.0, (total.sum_sq / n - std::norm(est.value)) * n / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

void require_verdict_samples(const McIntegrator& ctx, const char* probe) {
  if (ctx.n_samples < kMinVerdictSamples)
    throw validation_error(std::string(probe) + ": at least " +
                           std::to_string(kMinVerdictSamples) + " samples required");
}

}  // namespace

void McIntegrator::validate() const {
  if (n_samples == 0) throw validation_error("mc: n_samples must be positive");
  if (chunk_size == 0) throw validation_error("mc: chunk_size must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw validation_error("mc: sigma must be positive");
  if (dim < 1) throw validation_error("mc: dimension must be positive");
  if (!(proposal_scale >= 1.0) || !std::isfinite(proposal_scale))
    throw validation_error("mc: proposal_scale must be >= 1");
}

AffineMap AffineMap::scalar(cdouble a, cdouble b) {
  AffineMap phi;
  phi.a = CMatrix::Constant(1, 1, a);
  phi.b = CVector::Constant(1, b);
  return phi;
}

AffineMap AffineMap::diagonal(const CVector& diag) {
  AffineMap phi;
  phi.a = diag.asDiagonal();
  phi.b = CVector::Zero(diag.size());
  return phi;
}

CVector AffineMap::iterate(const CVector& x0, int m) const {
  if (m < 0) throw validation_error("affine map: negative iteration count");
  CVector x = x0;
  for (int i = 0; i < m; ++i) x = apply(x);
  return x;
}

std::string AffineMap::violation() const {
  if (a.rows() == 0 || a.rows() != a.cols()) return "matrix a must be square and non-empty";
  if (b.size() != a.rows()) return "offset b must match the dimension of a";
  if (!a.allFinite() || !b.allFinite()) return "entries must be finite";
  const double frob = a.norm();
  if (!(frob > 0.0 && frob < 1.0))
    return "Frobenius norm of a must lie in (0, 1), got " + format_double(frob);
  if (std::abs(a.determinant()) <= 1e-12) return "matrix a is not invertible";
  return {};
}

void AffineMap::validate() const {
  if (const auto why = violation(); !why.empty()) throw validation_error("affine map: " + why);
}

double measure_density(const CVector& z, double sigma) {
  if (!(sigma > 0.0)) throw validation_error("measure_density: sigma must be positive");
  const double d = static_cast<double>(z.size());
  return std::pow(2.0 * std::numbers::pi * sigma * sigma, -d) * std::exp(-z.norm() / sigma);
}

double measure_mass(int dim) {
  if (dim < 1) throw validation_error("measure_mass: dimension must be positive");
  return 2.0 * std::exp(std::lgamma(2.0 * dim) - dim * std::log(2.0) - std::lgamma(dim));
}

MeasureSampler::MeasureSampler(const McIntegrator& ctx, std::size_t chunk)
    : ctx_(ctx), rng_(stream_seed(ctx.seed, chunk)) {
  ctx.validate();
}

WeightedSample MeasureSampler::next() {
  WeightedSample s;
  s.z.resize(ctx_.dim);
  s.weight = draw_measure_sample(ctx_, rng_, s.z);
  return s;
}

std::vector<WeightedSample> sample_measure(const McIntegrator& ctx) {
  ctx.validate();
  std::vector<WeightedSample> out;
  out.reserve(ctx.n_samples);
  for (std::size_t c = 0; c < ctx.chunk_count(); ++c) {
    MeasureSampler sampler(ctx, c);
    const std::size_t count = std::min(ctx.chunk_size, ctx.n_samples - c * ctx.chunk_size);
    for (std::size_t k = 0; k < count; ++k) out.push_back(sampler.next());
  }
  return out;
}

McEstimate mc_integrate(const McIntegrator& ctx,
                        const std::function<cdouble(const CVector&)>& integrand) {
  ctx.validate();
  McEstimate est = chunked_mean(ctx, 0, "mc_integrate", [&](Rng& rng, CVector& z) {
    const double w = draw_measure_sample(ctx, rng, z);
    return w * integrand(z);
  });
  return est;
}

McEstimate mc_inner_product(const HlFunction& f, const HlFunction& g, const McIntegrator& ctx) {
  return mc_integrate(ctx, [&](const CVector& z) { return f(z) * std::conj(g(z)); });
}

HlFunction orthonormal_basis_1d(int n, double sigma) {
  if (n < 0 || n > 12) throw validation_error("orthonormal_basis_1d: n must be in [0, 12]");
  if (!(sigma > 0.0)) throw validation_error("orthonormal_basis_1d: sigma must be positive");
  const double norm = std::pow(sigma, n) * std::sqrt(std::tgamma(2.0 * n + 2.0));
  HlFunction e;
  e.description = "e_" + std::to_string(n);
  e.eval = [n, norm](const CVector& z) {
    cdouble p = 1.0;
    for (int i = 0; i < n; ++i) p *= z(0);
    return p / norm;
  };
  return e;
}

HlFunction hl_kernel_section(const CVector& w, double sigma) {
  HlFunction k;
  k.description = "K_w";
  k.eval = [w, sigma](const CVector& z) { return eval_hl_kernel(z, w, sigma); };
  return k;
}

double kernel_series_check(cdouble z, cdouble w, double sigma, int n_terms) {
  if (n_terms < 0 || n_terms > 13)
    throw validation_error("kernel_series_check: n_terms must be in [0, 13]");
  const CVector zv = CVector::Constant(1, z);
  const CVector wv = CVector::Constant(1, w);
  cdouble sum = 0.0;
  for (int n = 0; n < n_terms; ++n) {
    const HlFunction e = orthonormal_basis_1d(n, sigma);
    sum += e(zv) * std::conj(e(wv));
  }
  return std::abs(sum - eval_hl_kernel(zv, wv, sigma));
}

NormEstimate laplacian_kernel_norm(const CVector& x, const McIntegrator& ctx) {
  if (x.size() != ctx.dim) throw validation_error("laplacian_kernel_norm: dimension mismatch");
  const double sigma = ctx.sigma;
  const McEstimate sq = mc_integrate(ctx, [&](const CVector& z) {
    return cdouble(std::exp(-2.0 * (z - x).norm() / sigma), 0.0);
  });
  NormEstimate out;
  out.value = std::sqrt(std::max(0.0, sq.value.real()));
  out.std_error = out.value > 0.0 ? sq.std_error / (2.0 * out.value) : sq.std_error;
  out.bound = std::pow(3.0, -ctx.dim) * std::exp(x.norm() / sigma);
  return out;
}

double pi_statistic(const CVector& z, const AffineMap& phi, double sigma) {
  phi.validate();
  if (!(sigma > 0.0)) throw validation_error("pi_statistic: sigma must be positive");
  if (z.size() != phi.dim()) throw validation_error("pi_statistic: dimension mismatch");
  // K(w, w) = sinh(|w| / sigma) / (|w| / sigma)
  const double log_num = log_sinhc(phi.apply(z).norm() / sigma);
  const double log_den = log_sinhc(z.norm() / sigma);
  return std::exp(log_num - log_den);
}

std::string HlProbeReport::serialize() const {
  std::ostringstream out;
  out << "probe=closability_hl\n";
  out << "verdict=" << verdict << "\n";
  out << "change_of_variables_bound=" << format_double(change_of_variables_bound) << "\n";
  for (const auto& seq : sequences) {
    const std::string tag = "e" + std::to_string(seq.basis_index);
    out << "image_norms_" << tag << "=" << join(seq.image_norms) << "\n";
    out << "ratios_" << tag << "=" << join(seq.ratios) << "\n";
  }
  return out.str();
}

HlProbeReport closability_probe_hl(const AffineMap& phi, int m_max, const McIntegrator& ctx) {
  phi.validate();
  ctx.validate();
  require_verdict_samples(ctx, "closability_probe_hl");
  if (m_max < 3) throw validation_error("closability_probe_hl: m_max must be >= 3");
  if (phi.dim() != ctx.dim) throw validation_error("closability_probe_hl: dimension mismatch");

  HlProbeReport report;
  const double det = std::abs(phi.a.determinant());
  report.change_of_variables_bound =
      std::exp(phi.b.norm() / (phi.a.norm() * ctx.sigma)) / (det * det);

  bool bounded = true;
  for (int k : {0, 1}) {
    const HlFunction basis = orthonormal_basis_1d(k, ctx.sigma);
    HlProbeSequence seq;
    seq.basis_index = k;
    for (int m = 1; m <= m_max; ++m) {
      const double scale = 1.0 / m;
      HlFunction g{[&, scale](const CVector& z) { return scale * basis(z); }, "g_m"};
      HlFunction image{[&, scale](const CVector& z) { return scale * basis(phi.apply(z)); },
                       "K_phi g_m"};
      double image_norm = std::numeric_limits<double>::infinity();
      double g_norm = 0.0;
      try {
        image_norm = std::sqrt(mc_inner_product(image, image, ctx).value.real());
        g_norm = std::sqrt(mc_inner_product(g, g, ctx).value.real());
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numerical) throw;
        image_norm = std::numeric_limits<double>::infinity();
      }
      seq.image_norms.push_back(image_norm);
      seq.ratios.push_back(g_norm > 0.0 ? image_norm / g_norm
                                        : std::numeric_limits<double>::infinity());
    }
    const double first = seq.ratios.front();
    const double largest = *std::max_element(seq.ratios.begin(), seq.ratios.end());
    if (!std::isfinite(largest) || largest > first * 1.1) bounded = false;
    report.sequences.push_back(std::move(seq));
  }
  report.verdict = bounded ? "bounded" : "unbounded";
  return report;
}

double grbf_weight(const CVector& z, double sigma) {
  return std::exp(sigma * sigma * z.imag().squaredNorm());
}

HlFunction grbf_kernel_section(const CVector& center, double sigma) {
  HlFunction g;
  g.description = "grbf_section";
  g.eval = [center, sigma](const CVector& z) {
    cdouble s = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const cdouble d = z(i) - center(i);
      s += d * d;
    }
    return std::exp(-s / sigma);
  };
  return g;
}

std::string GrbfProbeReport::serialize() const {
  std::ostringstream out;
  out << "probe=closability_grbf\n";
  out << "verdict=" << verdict << "\n";
  out << "radii=" << join(radii) << "\n";
  out << "norms=" << join(norms) << "\n";
  out << "std_errors=" << join(std_errors) << "\n";
  out << "final_ratio=" << format_double(final_ratio) << "\n";
  return out.str();
}

GrbfProbeReport closability_probe_grbf(const AffineMap& phi, const std::vector<double>& radii,
                                       const McIntegrator& ctx, const HlFunction& g) {
  phi.validate();
  ctx.validate();
  require_verdict_samples(ctx, "closability_probe_grbf");
  if (phi.dim() != ctx.dim) throw validation_error("closability_probe_grbf: dimension mismatch");
  if (radii.size() < 3) throw validation_error("closability_probe_grbf: need at least 3 radii");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw validation_error("closability_probe_grbf: radii must be positive and increasing");

  const int dim = ctx.dim;
  const double sigma = ctx.sigma;
  const double prefactor =
      std::pow(2.0, dim) * std::pow(sigma, 2 * dim) / std::pow(std::numbers::pi, dim);

  GrbfProbeReport report;
  report.radii = radii;
  bool overflow = false;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double radius = radii[ri];
    // Volume of the ball of radius R in R^{2D}: pi^D R^{2D} / D!
    const double volume =
        std::exp(dim * std::log(std::numbers::pi) + 2.0 * dim * std::log(radius) -
                 std::lgamma(dim + 1.0));
    try {
      const McEstimate est =
          chunked_mean(ctx, kBallStreamSalt + ri, "closability_probe_grbf",
                       [&](Rng& rng, CVector& z) {
                         const double r = radius * std::pow(rng.uniform(), 1.0 / (2.0 * dim));
                         draw_direction(rng, z);
                         z *= r;
                         return cdouble(std::norm(g(phi.apply(z))) * grbf_weight(z, sigma), 0.0);
                       });
      const double sq = prefactor * volume * est.value.real();
      const double norm = std::sqrt(std::max(0.0, sq));
      report.norms.push_back(norm);
      report.std_errors.push_back(norm > 0.0 ? prefactor * volume * est.std_error / (2.0 * norm)
                                             : 0.0);
      if (!std::isfinite(norm)) overflow = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical) throw;
      report.norms.push_back(std::numeric_limits<double>::infinity());
      report.std_errors.push_back(std::numeric_limits<double>::infinity());
      overflow = true;
    }
  }

  const std::size_t n = report.norms.size();
  const double last = report.norms[n - 1];
  const double before = report.norms[n - 2];
  report.final_ratio = before > 0.0 ? last / before
                                    : (last > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  bool increasing = true;
  for (std::size_t i = 1; i < n; ++i)
    if (!(report.norms[i] > report.norms[i - 1])) increasing = false;
  const bool divergent = overflow || (increasing && report.final_ratio > 1.5);
  report.verdict = divergent ? "divergent" : "convergent";
  return report;
}

GrbfProbeReport closability_probe_grbf(const AffineMap& phi, const std::vector<double>& radii,
                                       const McIntegrator& ctx) {
  return closability_probe_grbf(phi, radii, ctx,
                                grbf_kernel_section(CVector::Zero(ctx.dim), ctx.sigma));
}

}  // namespace lapdmd
