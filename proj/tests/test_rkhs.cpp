#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "lapdmd/error.hpp"
#include "lapdmd/kernels.hpp"
#include "lapdmd/rkhs.hpp"

using namespace lapdmd;

namespace {

McIntegrator context(std::size_t n, double sigma = 1.0, int dim = 1, std::uint64_t seed = 20240229) {
  McIntegrator ctx;
  ctx.n_samples = n;
  ctx.sigma = sigma;
  ctx.dim = dim;
  ctx.seed = seed;
  return ctx;
}

CVector c1(cdouble z) { return CVector::Constant(1, z); }

HlFunction constant_one() { return {[](const CVector&) { return cdouble(1.0); }, "1"}; }
HlFunction identity_1d() { return {[](const CVector& z) { return z(0); }, "z"}; }

// Polar midpoint quadrature over the complex plane of f(z) * density(z),
// radius truncated at r_max.
double polar_quadrature(const std::function<double(cdouble)>& f, double sigma, double r_max,
                        int n_r = 4000, int n_theta = 512) {
  const double dr = r_max / n_r;
  const double dt = 2.0 * M_PI / n_theta;
  double sum = 0.0;
  for (int i = 0; i < n_r; ++i) {
    const double r = (i + 0.5) * dr;
    const double radial = std::exp(-r / sigma) / (2.0 * M_PI * sigma * sigma) * r * dr * dt;
    for (int j = 0; j < n_theta; ++j) sum += f(std::polar(r, (j + 0.5) * dt)) * radial;
  }
  return sum;
}

struct ThreadsEnv {
  explicit ThreadsEnv(const char* v) { setenv("LAPDMD_THREADS", v, 1); }
  ~ThreadsEnv() { unsetenv("LAPDMD_THREADS"); }
};

}  // namespace

TEST_CASE("measure density") {
  CHECK(measure_density(CVector::Zero(1), 1.0) == doctest::Approx(1.0 / (2.0 * M_PI)));
  double prev = measure_density(CVector::Zero(2), 0.7);
  for (double r = 0.1; r < 10.0; r += 0.1) {
    CVector z(2);
    z << cdouble(r, 0.0), cdouble(0.0, r);
    const double v = measure_density(z, 0.7);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(measure_density(CVector::Zero(1), 0.0), Error);
}

TEST_CASE("measure has unit mass in one dimension") {
  CHECK(measure_mass(1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(measure_mass(2) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(polar_quadrature([](cdouble) { return 1.0; }, 1.0, 60.0) == doctest::Approx(1.0).epsilon(1e-4));
  const McEstimate mass = mc_integrate(context(1'000'000), [](const CVector&) { return cdouble(1.0); });
  CHECK(std::abs(mass.value - 1.0) < 0.01);
}

TEST_CASE("plain sampling draws Gamma(2D, sigma) radii with uniform directions") {
  McIntegrator ctx = context(1'000'000);
  ctx.proposal_scale = 1.0;
  const auto samples = sample_measure(ctx);
  REQUIRE(samples.size() == ctx.n_samples);
  double mean_r = 0.0;
  cdouble mean_dir = 0.0;
  for (const auto& s : samples) {
    CHECK_FALSE(s.weight != 1.0);
    mean_r += s.z.norm();
    mean_dir += s.z(0) / std::abs(s.z(0));
  }
  mean_r /= double(samples.size());
  mean_dir /= double(samples.size());
  CHECK(std::abs(mean_r - 2.0) < 0.01);
  CHECK(std::abs(mean_dir) < 0.01);
}

TEST_CASE("sampling is reproducible for a fixed seed") {
  McIntegrator ctx = context(10, 1.0, 2, 77);
  const auto a = sample_measure(ctx);
  const auto b = sample_measure(ctx);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(a[i].z == b[i].z);
    CHECK(a[i].weight == b[i].weight);
  }
  MeasureSampler streamed(ctx, 0);
  CHECK(streamed.next().z == a[0].z);
  ctx.seed = 78;
  CHECK(sample_measure(ctx)[0].z != a[0].z);
}

TEST_CASE("inner products of low-order monomials") {
  const McIntegrator ctx = context(1'000'000);
  CHECK(std::abs(mc_inner_product(constant_one(), constant_one(), ctx).value - 1.0) < 0.01);
  CHECK(std::abs(mc_inner_product(identity_1d(), constant_one(), ctx).value) < 0.01);
  CHECK(std::abs(mc_inner_product(identity_1d(), identity_1d(), ctx).value - 6.0) < 0.1);
}

TEST_CASE("inner products are normalized in higher dimension") {
  const McIntegrator ctx = context(200'000, 1.0, 2);
  const McEstimate one = mc_inner_product(constant_one(), constant_one(), ctx);
  CHECK(std::abs(one.value - 1.0) < 0.01);
}

TEST_CASE("non-finite integrand is reported with the sample") {
  const McIntegrator ctx = context(1000);
  const HlFunction bad{[](const CVector& z) { return z(0).real() > 1.0 ? cdouble(NAN) : cdouble(1.0); },
                       "bad"};
  try {
    mc_inner_product(bad, constant_one(), ctx);
    FAIL("expected a numerical error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
    CHECK(std::string(e.what()).find("sample") != std::string::npos);
  }
}

TEST_CASE("orthonormal basis in one dimension") {
  const HlFunction e0 = orthonormal_basis_1d(0, 1.3);
  CHECK(e0(c1(cdouble(4.0, -2.0))) == cdouble(1.0));
  const HlFunction e3 = orthonormal_basis_1d(3, 2.0);
  CHECK(std::abs(e3(c1(2.0)) - 1.0 / std::sqrt(5040.0)) < 1e-15);
  CHECK_THROWS_AS(orthonormal_basis_1d(13, 1.0), Error);
  CHECK_THROWS_AS(orthonormal_basis_1d(-1, 1.0), Error);

  const McIntegrator ctx = context(1'000'000);
  const auto e1 = orthonormal_basis_1d(1, 1.0);
  const auto e2 = orthonormal_basis_1d(2, 1.0);
  CHECK(std::abs(mc_inner_product(e1, e1, ctx).value - 1.0) < 0.05);
  CHECK(std::abs(mc_inner_product(e1, e2, ctx).value) < 0.05);
}

TEST_CASE("orthonormality of the first five basis functions") {
  for (double sigma : {0.5, 1.0, 2.0}) {
    const McIntegrator ctx = context(1'000'000, sigma, 1, 31);
    for (int n = 0; n <= 4; ++n)
      for (int m = n; m <= 4; ++m) {
        const cdouble v =
            mc_inner_product(orthonormal_basis_1d(n, sigma), orthonormal_basis_1d(m, sigma), ctx).value;
        CHECK(std::abs(v - (n == m ? 1.0 : 0.0)) < 0.05);
      }
  }
}

TEST_CASE("reproducing property of the sinh kernel") {
  const double sigma = 1.0;
  const McIntegrator ctx = context(1'000'000, sigma, 1, 5);
  for (int n = 0; n <= 2; ++n) {
    const HlFunction f = orthonormal_basis_1d(n, sigma);
    for (double w : {0.0, sigma, 2.0 * sigma}) {
      const cdouble got = mc_inner_product(f, hl_kernel_section(c1(w), sigma), ctx).value;
      const cdouble want = f(c1(w));
      CHECK(std::abs(got - want) < 0.05 * (1.0 + std::abs(want)));
    }
  }
}

TEST_CASE("kernel series truncation") {
  for (int n : {1, 5, 12}) CHECK(kernel_series_check(0.0, 0.0, 1.0, n) == 0.0);
  for (double sigma : {0.5, 1.0, 3.0}) CHECK(kernel_series_check(sigma, sigma, sigma, 12) < 1e-10);
  double prev = kernel_series_check(2.0, 2.0, 1.0, 1);
  for (int n = 2; n <= 12; ++n) {
    const double r = kernel_series_check(2.0, 2.0, 1.0, n);
    CHECK(r < prev);
    prev = r;
  }
  CHECK(kernel_series_check(2.0, 2.0, 1.0, 4) > kernel_series_check(2.0, 2.0, 1.0, 8));
}

TEST_CASE("Laplacian kernel norm at the origin is exactly one third") {
  const NormEstimate n = laplacian_kernel_norm(c1(0.0), context(1'000'000));
  CHECK(std::abs(n.value - 1.0 / 3.0) < 0.01);
  CHECK(n.bound == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("Laplacian kernel norm agrees with quadrature, respects the bound and shrinks with |x|") {
  const McIntegrator ctx = context(1'000'000, 1.0, 1, 9);
  double prev = INFINITY;
  for (double x : {0.0, 0.5, 1.0, 2.0}) {
    const NormEstimate n = laplacian_kernel_norm(c1(x), ctx);
    const double quad = std::sqrt(polar_quadrature(
        [x](cdouble z) { return std::exp(-2.0 * std::abs(z - x)); }, 1.0, 60.0));
    CHECK(std::abs(n.value - quad) < 4.0 * n.std_error + 1e-3);
    CHECK(n.value <= std::exp(std::abs(x)) / 3.0 + 3.0 * n.std_error);
    CHECK(n.value <= prev + 3.0 * n.std_error);
    prev = n.value;
  }
}

TEST_CASE("Laplacian kernel norm bound in one and two dimensions") {
  for (int dim : {1, 2}) {
    const McIntegrator ctx = context(400'000, 1.0, dim, 13);
    for (double r : {0.0, 0.25, 0.5, 1.0, 2.0}) {
      CVector x = CVector::Zero(dim);
      x(0) = cdouble(r / std::sqrt(2.0), r / std::sqrt(2.0));
      const NormEstimate n = laplacian_kernel_norm(x, ctx);
      CHECK(n.bound == doctest::Approx(std::pow(3.0, -dim) * std::exp(r)));
      CHECK(n.value <= n.bound + 3.0 * n.std_error);
    }
  }
}

TEST_CASE("Pi statistic") {
  const AffineMap half = AffineMap::scalar(0.5);
  CHECK(pi_statistic(c1(0.0), half, 1.0) == doctest::Approx(1.0));

  const double z = 50.0;
  const double oracle = (std::sinh(25.0) / 25.0) / (std::sinh(50.0) / 50.0);
  const double v = pi_statistic(c1(z), half, 1.0);
  CHECK(v < 1e-4);
  CHECK(v == doctest::Approx(oracle).epsilon(1e-12));

  double prev = INFINITY;
  for (double r : {10.0, 20.0, 40.0, 80.0}) {
    const double p = pi_statistic(c1(r), half, 1.0);
    CHECK(p < prev);
    prev = p;
  }
  CHECK(prev < 1e-4);

  CHECK_THROWS_AS(pi_statistic(c1(1.0), AffineMap::scalar(1.0), 1.0), Error);
  CHECK_THROWS_AS(pi_statistic(c1(1.0), AffineMap::scalar(0.0), 1.0), Error);
}

TEST_CASE("Pi statistic decays along rays for contractive symbols") {
  Rng rng(41);
  for (int t = 0; t < 40; ++t) {
    const int dim = 1 + t % 3;
    CMatrix a(dim, dim);
    CVector b(dim), u(dim);
    for (int i = 0; i < dim; ++i) {
      b(i) = cdouble(rng.normal(), rng.normal());
      u(i) = cdouble(rng.normal(), rng.normal());
      for (int j = 0; j < dim; ++j) a(i, j) = cdouble(rng.normal(), rng.normal());
    }
    a *= (0.1 + 0.8 * rng.uniform()) / a.norm();
    u.normalize();
    const AffineMap phi{a, b};
    REQUIRE(phi.violation().empty());
    const double start = 2.0 * b.norm() / (1.0 - a.norm());
    double prev = INFINITY;
    for (double r = start + 0.5; r < start + 400.0; r *= 1.3) {
      const double p = pi_statistic(r * u, phi, 1.0);
      CHECK(p < prev);
      prev = p;
    }
    CHECK(prev < 1e-6);
  }
}

TEST_CASE("affine map invariants") {
  CHECK(AffineMap::scalar(0.5).violation().empty());
  CHECK_FALSE(AffineMap::scalar(1.0).violation().empty());
  CHECK_FALSE(AffineMap::scalar(0.0).violation().empty());
  CMatrix singular = CMatrix::Zero(2, 2);
  singular(0, 0) = 0.5;
  CHECK_FALSE((AffineMap{singular, CVector::Zero(2)}).violation().empty());
  const AffineMap phi = AffineMap::diagonal((CVector(2) << 0.5, 0.25).finished());
  CVector x0(2);
  x0 << 1.0, 2.0;
  CHECK((phi.iterate(x0, 3) - (CVector(2) << 0.125, 2.0 / 64).finished()).norm() < 1e-15);
  CHECK(phi.iterate(x0, 0) == x0);
}

TEST_CASE("closability probe on the Laplacian-measure space") {
  const AffineMap phi = AffineMap::scalar(0.5);
  const McIntegrator ctx = context(200'000);
  const HlProbeReport report = closability_probe_hl(phi, 10, ctx);
  CHECK(report.verdict == "bounded");
  REQUIRE(report.sequences.size() == 2);
  for (const auto& seq : report.sequences) {
    REQUIRE(seq.ratios.size() == 10);
    for (double r : seq.ratios) CHECK(std::abs(r - seq.ratios[0]) <= 0.1 * seq.ratios[0]);
    CHECK(std::abs(seq.image_norms[9] - seq.image_norms[0] / 10.0) < 1e-12);
    CHECK(seq.ratios[0] <= report.change_of_variables_bound);
  }
  CHECK(report.change_of_variables_bound == doctest::Approx(4.0));
  CHECK(report.serialize().find("verdict=bounded") != std::string::npos);

  CHECK_THROWS_AS(closability_probe_hl(phi, 2, ctx), Error);
  CHECK_THROWS_AS(closability_probe_hl(phi, 10, context(1000)), Error);
}

TEST_CASE("closability probe on the Gaussian RBF space diverges") {
  const double sigma = 1.0, a = 0.5;
  const AffineMap phi = AffineMap::scalar(a);
  const McIntegrator ctx = context(400'000, sigma);
  const GrbfProbeReport report = closability_probe_grbf(phi, {2.0, 4.0, 8.0}, ctx);
  CHECK(report.verdict == "divergent");
  REQUIRE(report.norms.size() == 3);
  CHECK(report.norms[0] < report.norms[1]);
  CHECK(report.norms[1] < report.norms[2]);
  CHECK(report.final_ratio > 1.5);

  // Midpoint quadrature over the disc of radius 2.
  const double radius = 2.0;
  const int n = 800;
  double quad = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) * radius / n;
    for (int j = 0; j < n; ++j) {
      const double t = (j + 0.5) * 2.0 * M_PI / n;
      const double x = r * std::cos(t), y = r * std::sin(t);
      quad += std::exp(sigma * sigma * y * y - 2.0 * a * a * (x * x - y * y) / sigma) * r;
    }
  }
  quad *= (radius / n) * (2.0 * M_PI / n) * 2.0 * sigma * sigma / M_PI;
  CHECK(std::abs(report.norms[0] - std::sqrt(quad)) < 4.0 * report.std_errors[0] + 1e-3 * std::sqrt(quad));

  const HlFunction zero{[](const CVector&) { return cdouble(0.0); }, "0"};
  const GrbfProbeReport flat = closability_probe_grbf(phi, {2.0, 4.0, 8.0}, ctx, zero);
  CHECK(flat.verdict == "convergent");
  for (double v : flat.norms) CHECK(v == 0.0);

  CHECK_THROWS_AS(closability_probe_grbf(phi, {2.0, 4.0}, ctx), Error);
  CHECK_THROWS_AS(closability_probe_grbf(phi, {2.0, 8.0, 4.0}, ctx), Error);
}

TEST_CASE("Gaussian RBF weight growth along the imaginary axis") {
  const double sigma = 1.0;
  const HlFunction g = grbf_kernel_section(CVector::Zero(1), sigma);
  const AffineMap phi = AffineMap::scalar(0.5);
  for (double r : {1.0, 2.0, 4.0}) {
    const auto integrand = [&](double rad) {
      const CVector z = c1(cdouble(0.0, rad));
      return std::norm(g(phi.apply(z))) * grbf_weight(z, sigma);
    };
    CHECK(integrand(2.0 * r) >= integrand(r) * integrand(r));
  }
  CHECK(grbf_weight(c1(cdouble(5.0, 0.0)), sigma) == 1.0);
}

TEST_CASE("Monte-Carlo estimates do not depend on the thread count") {
  McIntegrator ctx = context(100'000);
  ctx.chunk_size = 1000;
  const auto f = [](const CVector& z) { return std::exp(-std::abs(z(0) - 0.3)) * z(0); };
  McEstimate one, many;
  {
    ThreadsEnv env("1");
    one = mc_integrate(ctx, f);
  }
  {
    ThreadsEnv env("7");
    many = mc_integrate(ctx, f);
  }
  CHECK(one.value == many.value);
  CHECK(one.std_error == many.std_error);
}

TEST_CASE("integrator validation") {
  McIntegrator ctx = context(0);
  CHECK_THROWS_AS(ctx.validate(), Error);
  ctx = context(10, -1.0);
  CHECK_THROWS_AS(ctx.validate(), Error);
  ctx = context(10);
  ctx.proposal_scale = 0.5;
  CHECK_THROWS_AS(ctx.validate(), Error);
}
