#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "lapdmd/error.hpp"
#include "lapdmd/experiment.hpp"
#include "lapdmd/io.hpp"
#include "lapdmd/kedmd.hpp"
#include "lapdmd/metrics.hpp"
#include "lapdmd/rkhs.hpp"
#include "lapdmd/rng.hpp"
#include "lapdmd/sampling.hpp"

using namespace lapdmd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lapdmd_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Matrix trajectory(const Vector& diag, Vector x, int snapshots) {
  Matrix m(diag.size(), snapshots);
  for (int k = 0; k < snapshots; ++k) {
    m.col(k) = x;
    x = diag.cwiseProduct(x);
  }
  return m;
}

KedmdModel fit_trajectory(const Vector& diag, const Vector& x0, int snapshots) {
  DataMatrix dm;
  dm.values = trajectory(diag, x0, snapshots);
  const SnapshotPairs p = build_pairs(dm);
  return fit(p.x, p.y, KernelSpec::laplacian(1.0));
}

McIntegrator mc(double sigma) {
  McIntegrator ctx;
  ctx.n_samples = 1'000'000;
  ctx.seed = 20240229;
  ctx.sigma = sigma;
  return ctx;
}

CVector c1(double v) { return CVector::Constant(1, cdouble(v)); }

Outcome experiment1() {
  Config cfg = Config::load(fs::path(LAPDMD_CONFIG_DIR) / "burgers_exp1.cfg");
  cfg.set("report.out", scratch("c1").string());
  const RunSummary run = run_experiment(ExperimentConfig::from_config(cfg));
  double lap = NAN, grbf = NAN;
  for (const auto& k : run.kernels) {
    if (k.kernel.name() == "laplacian") lap = k.mean_ewe.at(0);
    if (k.kernel.name() == "grbf") grbf = k.mean_ewe.at(0);
  }
  return {lap < grbf, "snapshot 39 mean EWE laplacian=" + fmt(lap) + " grbf=" + fmt(grbf)};
}

Outcome linear_spectrum() {
  const KedmdModel model = fit_trajectory((Vector(2) << 0.9, 0.5).finished(), Vector::Ones(2), 50);
  bool pass = true;
  std::string detail = "rank=" + std::to_string(model.rank);
  for (double target : {0.9, 0.5}) {
    double best = std::numeric_limits<double>::infinity();
    cdouble nearest = 0.0;
    for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i)
      if (std::abs(model.eigenvalues(i) - target) < best) {
        best = std::abs(model.eigenvalues(i) - target);
        nearest = model.eigenvalues(i);
      }
    pass = pass && best < 1e-3;
    detail += " nearest(" + fmt(target) + ")=" + fmt(nearest.real()) + (nearest.imag() < 0 ? "" : "+") +
              fmt(nearest.imag()) + "i err=" + fmt(best);
  }
  detail += " leading=" + fmt(std::abs(model.eigenvalues(0)));
  return {pass, detail};
}

Outcome faithfulness() {
  bool pass = true;
  std::string detail;
  struct Case {
    Vector diag, x0;
  };
  const std::vector<Case> cases{{(Vector(2) << 0.8, 0.4).finished(), Vector::Ones(2)},
                                {Vector::Constant(1, 0.9), Vector::Ones(1)}};
  for (const auto& c : cases) {
    const KedmdModel model = fit_trajectory(c.diag, c.x0, 50);
    const AffineMap phi = AffineMap::diagonal(c.diag.cast<cdouble>());
    double worst = 0.0;
    for (const auto& s : faithful_difference(model, phi, 0, model.rank).partial_sums)
      pass = pass && s.norm() == 0.0;
    for (std::size_t m : {1u, 2u, 3u})
      worst = std::max(worst, faithful_difference(model, phi, m, model.rank).converged_value.norm());
    pass = pass && worst < 1e-3 * c.x0.norm();
    detail += "D=" + std::to_string(c.diag.size()) + " max|diff|=" + fmt(worst) + " ";
  }
  const AffineMap literal = AffineMap::diagonal((CVector(2) << 0.9, 0.5).finished());
  detail += "(diag(0.9,0.5) admissible: " + std::string(literal.violation().empty() ? "yes" : "no, " + literal.violation()) + ")";
  return {pass, detail};
}

Outcome orthonormality() {
  double worst = 0.0;
  for (double sigma : {0.5, 1.0, 2.0}) {
    const McIntegrator ctx = mc(sigma);
    for (int n = 0; n <= 4; ++n)
      for (int m = n; m <= 4; ++m) {
        const cdouble v =
            mc_inner_product(orthonormal_basis_1d(n, sigma), orthonormal_basis_1d(m, sigma), ctx).value;
        worst = std::max(worst, std::abs(v - (n == m ? 1.0 : 0.0)));
      }
  }
  return {worst < 0.05, "max |<e_n,e_m> - delta| = " + fmt(worst)};
}

Outcome norm_bound() {
  bool pass = true;
  std::string detail;
  const McIntegrator ctx = mc(1.0);
  for (double x : {0.0, 0.5, 1.0, 2.0}) {
    const NormEstimate est = laplacian_kernel_norm(c1(x), ctx);
    const double bound = std::exp(std::abs(x)) / 3.0;
    pass = pass && est.value <= bound + 3.0 * est.std_error;
    if (x == 0.0) pass = pass && std::abs(est.value - 1.0 / 3.0) <= 0.01;
    detail += "x=" + fmt(x) + ":" + fmt(est.value) + "<=" + fmt(bound) + " ";
  }
  return {pass, detail};
}

Outcome pi_decay() {
  const AffineMap phi = AffineMap::scalar(0.5);
  bool pass = true;
  double prev = std::numeric_limits<double>::infinity();
  std::string detail;
  for (double z : {10.0, 20.0, 40.0, 80.0}) {
    const double p = pi_statistic(c1(z), phi, 1.0);
    pass = pass && p < prev;
    prev = p;
    detail += "z=" + fmt(z) + ":" + fmt(p) + " ";
  }
  return {pass && prev < 1e-4, detail};
}

Outcome closability() {
  const AffineMap phi = AffineMap::scalar(0.5);
  const McIntegrator ctx = mc(1.0);
  const HlProbeReport hl = closability_probe_hl(phi, 10, ctx);
  bool pass = hl.verdict == "bounded";
  double spread = 0.0;
  for (const auto& seq : hl.sequences)
    for (double r : seq.ratios) spread = std::max(spread, std::abs(r - seq.ratios[0]) / seq.ratios[0]);
  pass = pass && spread <= 0.1;
  const GrbfProbeReport grbf = closability_probe_grbf(phi, {2.0, 4.0, 8.0}, ctx);
  pass = pass && grbf.verdict == "divergent" && grbf.final_ratio > 1.5;
  return {pass, "hl=" + hl.verdict + " ratio spread=" + fmt(spread) + " grbf=" + grbf.verdict +
                    " final ratio=" + fmt(grbf.final_ratio)};
}

Outcome frobenius() {
  Rng rng(20240229);
  double worst = 0.0;
  for (int d : {2, 5, 10})
    for (int t = 0; t < 100; ++t) {
      CMatrix a(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = cdouble(2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
      const double lhs = (CMatrix::Identity(d, d) - a).squaredNorm();
      const double rhs = d + a.squaredNorm() - 2.0 * a.trace().real();
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  return {worst < 1e-12, "max |lhs - rhs| = " + fmt(worst)};
}

Outcome series() {
  const double sigma = 1.0;
  const double at_sigma = kernel_series_check(sigma, sigma, sigma, 12);
  bool pass = at_sigma < 1e-10;
  std::string detail = "residual at sigma (12 terms)=" + fmt(at_sigma) + "; at 2 sigma:";
  double prev = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= 12; ++n) {
    const double r = kernel_series_check(2 * sigma, 2 * sigma, sigma, n);
    pass = pass && r < prev;
    prev = r;
    if (n % 4 == 0) detail += " n=" + std::to_string(n) + ":" + fmt(r);
  }
  return {pass, detail};
}

int run_cli(const std::string& threads, const fs::path& out) {
  const std::string cmd = "LAPDMD_THREADS=" + threads + " \"" + LAPDMD_CLI_PATH + "\" run --config \"" +
                          (fs::path(LAPDMD_CONFIG_DIR) / "burgers_exp1.cfg").string() + "\" --out \"" +
                          out.string() + "\" > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path a = scratch("c10_t1"), b = scratch("c10_t4");
  if (run_cli("1", a) != 0 || run_cli("4", b) != 0) return {false, "cli run failed"};
  std::size_t compared = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto ext = entry.path().extension();
    if (ext != ".csv" && ext != ".pgm") continue;
    ++compared;
    const fs::path other = b / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differing;
  }
  std::size_t in_b = 0;
  for (const auto& entry : fs::directory_iterator(b)) {
    const auto ext = entry.path().extension();
    if (ext == ".csv" || ext == ".pgm") ++in_b;
  }
  return {compared > 0 && differing == 0 && in_b == compared,
          std::to_string(compared) + " artifacts compared, " + std::to_string(differing) +
              " differ (LAPDMD_THREADS=1 vs 4)"};
}

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds, 0 when unbounded
  std::function<Outcome()> body;
};

}  // namespace

int main() {
  setenv("LAPDMD_THREADS", "1", 1);
  const std::vector<Criterion> criteria{
      {1, "Burgers kernel ordering (laplacian beats grbf)", 60.0, experiment1},
      {2, "linear-system spectrum contains 0.9 and 0.5", 5.0, linear_spectrum},
      {3, "faithful mode difference", 5.0, faithfulness},
      {4, "H_L orthonormality", 30.0, orthonormality},
      {5, "Laplacian kernel norm bound", 0.0, norm_bound},
      {6, "Pi statistic decay", 0.0, pi_decay},
      {7, "closability contrast", 0.0, closability},
      {8, "Frobenius identity", 0.0, frobenius},
      {9, "kernel series", 0.0, series},
      {10, "determinism across thread counts", 0.0, determinism},
  };

  int passed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && secs >= c.time_limit) {
      out.pass = false;
      out.detail += " [over " + fmt(c.time_limit) + " s limit]";
    }
    passed += out.pass;
    std::printf("%s C%d %s (%.2f s): %s\n", out.pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%zu passed\n", passed, criteria.size());
  return 0;
}
