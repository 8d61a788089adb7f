#include "lapdmd/experiment.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lapdmd/dynamics.hpp"
#include "lapdmd/error.hpp"
#include "lapdmd/metrics.hpp"
#include "lapdmd/rkhs.hpp"

namespace lapdmd {

namespace {

struct OdeDefaults {
  double dt;
  std::size_t snapshots;
  Vector x0;
};

OdeDefaults ode_defaults(const std::string& system) {
  if (system == "lorenz63" || system == "lorenz")
    return {0.001, 200'000, Vector::Ones(3)};
  if (system == "rossler") return {0.01, 64'000, Vector::Ones(3)};
  if (system == "duffing") return {0.01, 50'000, duffing_initial_state()};
  throw validation_error("config: unknown source.system '" + system + "'");
}

std::size_t to_size(long long v, const std::string& key) {
  if (v < 0) throw validation_error("config: '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

std::pair<std::size_t, std::size_t> parse_shape(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw validation_error("config: reshape must look like ROWSxCOLS");
  const double r = parse_double(text.substr(0, x));
  const double c = parse_double(text.substr(x + 1));
  if (r < 1 || c < 1 || r != std::floor(r) || c != std::floor(c))
    throw validation_error("config: reshape dimensions must be positive integers");
  return {static_cast<std::size_t>(r), static_cast<std::size_t>(c)};
}

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

std::string snapshot_tag(std::size_t m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03zu", m);
  return buf;
}

std::string join_indices(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

std::vector<double> parse_doubles(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) out.push_back(parse_double(s));
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
  ExperimentConfig out;
  out.name = cfg.get_string("name", out.name);

  SourceSpec& src = out.source;
  const std::string kind = cfg.get_string("source.kind", "generate");
  if (kind == "generate") {
    src.kind = SourceKind::Generate;
  } else if (kind == "csv") {
    src.kind = SourceKind::LoadCsv;
  } else {
    throw validation_error("config: source.kind must be 'generate' or 'csv'");
  }
  src.system = cfg.get_string("source.system", src.system);
  if (src.kind == SourceKind::LoadCsv) {
    const auto path = cfg.get("source.path");
    if (!path) throw validation_error("config: source.path is required for csv sources");
    src.path = *path;
    if (src.path.is_relative() && !cfg.base_dir().empty()) src.path = cfg.base_dir() / src.path;
    if (!std::filesystem::exists(src.path))
      throw validation_error("config: source.path '" + src.path.string() + "' does not exist");
  } else if (src.system != "burgers") {
    ode_defaults(src.system);
  }
  src.dt = cfg.get_double("source.dt", 0.0);
  if (src.dt < 0.0) throw validation_error("config: source.dt must be positive");
  src.snapshots = to_size(cfg.get_int("source.snapshots", 0), "source.snapshots");
  src.x0 = parse_doubles(cfg.get_list("source.x0", {}));
  src.burgers.nu = cfg.get_double("burgers.nu", src.burgers.nu);
  src.burgers.n_x = static_cast<int>(cfg.get_int("burgers.nx", src.burgers.n_x));
  src.burgers.n_t = static_cast<int>(cfg.get_int("burgers.nt", src.burgers.n_t));
  src.burgers.t_end = cfg.get_double("burgers.t_end", src.burgers.t_end);
  src.burgers.x_min = cfg.get_double("burgers.x_min", src.burgers.x_min);
  src.burgers.x_max = cfg.get_double("burgers.x_max", src.burgers.x_max);
  src.burgers.substeps = static_cast<int>(cfg.get_int("burgers.substeps", 0));

  const double sigma = cfg.get_double("kernel.sigma", 1.0);
  for (const auto& name : cfg.get_list("kernels", {"laplacian", "grbf"})) {
    KernelSpec k = KernelSpec::parse(name, sigma);
    k.sigma = cfg.get_double("kernel." + k.name() + ".sigma", sigma);
    k.validate();
    out.kernels.push_back(k);
  }
  if (out.kernels.empty()) throw validation_error("config: no kernels listed");

  out.sampling.seed = static_cast<std::uint64_t>(cfg.get_int("sampling.seed", 0));
  out.sampling.shuffle = cfg.get_bool("sampling.shuffle", true);
  out.sampling.n_keep = to_size(cfg.get_int("sampling.n_keep", 0), "sampling.n_keep");
  if (const auto shape = cfg.get("sampling.reshape"); shape && !shape->empty())
    out.sampling.reshape = parse_shape(*shape);

  out.fit.rank_tol = cfg.get_double("fit.rank_tol", out.fit.rank_tol);
  if (const auto cap = cfg.get_int("fit.max_rank", 0); cap > 0)
    out.fit.max_rank = static_cast<std::size_t>(cap);

  for (const auto& s : cfg.get_list("report.snapshots", {"0"})) {
    const double v = parse_double(s);
    if (v < 0 || v != std::floor(v))
      throw validation_error("config: report.snapshots must be non-negative integers");
    out.snapshots.push_back(static_cast<std::size_t>(v));
  }
  std::filesystem::path out_dir = cfg.get_string("report.out", "out/" + out.name);
  out.out_dir = out_dir;
  out.zero_tol = cfg.get_double("report.zero_tol", out.zero_tol);
  out.dominant_tol = cfg.get_double("report.dominant_tol", out.dominant_tol);

  // Snapshot indices must address columns of the matrix handed to the fit.
  std::size_t available = out.sampling.n_keep;
  if (out.sampling.reshape) available = out.sampling.reshape->second;
  if (available > 0)
    for (std::size_t m : out.snapshots)
      if (m >= available)
        throw validation_error("config: snapshot index " + std::to_string(m) +
                               " is out of range for " + std::to_string(available) +
                               " retained snapshots");
  return out;
}

DataMatrix generate_source(const SourceSpec& source) {
  if (source.kind == SourceKind::LoadCsv) {
    DataMatrix m = load_csv(source.path);
    m.dt = source.dt > 0.0 ? source.dt : 1.0;
    return m;
  }
  if (source.system == "burgers") return burgers_solve(source.burgers);

  const OdeDefaults def = ode_defaults(source.system);
  const double dt = source.dt > 0.0 ? source.dt : def.dt;
  const std::size_t snapshots = source.snapshots > 0 ? source.snapshots : def.snapshots;
  if (snapshots < 2) throw validation_error("config: source.snapshots must be >= 2");
  Vector x0 = def.x0;
  if (!source.x0.empty()) x0 = Eigen::Map<const Vector>(source.x0.data(),
                                                         static_cast<Eigen::Index>(source.x0.size()));
  return integrate_rk4(ode_system(source.system), x0, dt, snapshots - 1);
}

SamplingPlan sampling_plan_from_config(const Config& cfg, std::size_t columns) {
  SamplingPlan plan;
  plan.seed = static_cast<std::uint64_t>(cfg.get_int("sampling.seed", 0));
  plan.shuffle = cfg.get_bool("sampling.shuffle", true);
  plan.n_keep = to_size(cfg.get_int("sampling.n_keep", 0), "sampling.n_keep");
  if (plan.n_keep == 0) plan.n_keep = columns;
  if (const auto shape = cfg.get("sampling.reshape"); shape && !shape->empty())
    plan.reshape = parse_shape(*shape);
  return plan;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  const DataMatrix raw = generate_source(cfg.source);
  raw.validate();

  SamplingPlan plan = cfg.sampling;
  if (plan.n_keep == 0) plan.n_keep = raw.cols();
  const SampledData sampled = apply_plan(raw, plan);
  const Matrix& provided = sampled.matrix.values;
  const auto columns = static_cast<std::size_t>(provided.cols());
  for (std::size_t m : cfg.snapshots)
    if (m >= columns)
      throw validation_error("run: snapshot index " + std::to_string(m) + " >= " +
                             std::to_string(columns) + " retained snapshots");

  // "Actual" is the time-ordered data at the same shape as what the fit sees.
  Matrix actual;
  if (plan.reshape)
    actual = reshape_series(take_partial(raw, plan.n_keep), plan.reshape->first,
                            plan.reshape->second).values;
  else
    actual = raw.values;

  // Ground truth of provided column m, located through the permutation.
  const auto truth_column = [&](std::size_t m) -> Vector {
    if (plan.reshape) return provided.col(static_cast<Eigen::Index>(m));
    return raw.values.col(static_cast<Eigen::Index>(sampled.permutation[m]));
  };

  const SnapshotPairs pairs = build_pairs(sampled.matrix);
  RunSummary summary;
  std::ostringstream text;
  text << "name=" << cfg.name << "\n";
  text << "source=" << (cfg.source.kind == SourceKind::LoadCsv ? "csv" : cfg.source.system) << "\n";
  text << "data_shape=" << shape_string(raw.values) << "\n";
  text << "sampled_shape=" << shape_string(provided) << "\n";
  text << "shuffle=" << (plan.shuffle ? "true" : "false") << "\n";
  text << "seed=" << plan.seed << "\n";
  text << "snapshots=" << join_indices(cfg.snapshots) << "\n";

  const auto& out_dir = cfg.out_dir;
  const auto emit_pgm = [&](const Matrix& m, const std::string& file) {
    save_heatmap_pgm(m, out_dir / file);
    summary.artifacts.push_back(out_dir / file);
  };
  const auto emit_csv = [&](const Matrix& m, const std::string& file,
                            const std::vector<std::string>& header) {
    save_csv(m, out_dir / file, header);
    summary.artifacts.push_back(out_dir / file);
  };

  emit_pgm(actual, "actual.pgm");
  emit_pgm(provided, "irregular_sparse.pgm");
  {
    Matrix perm(static_cast<Eigen::Index>(sampled.permutation.size()), 1);
    for (std::size_t k = 0; k < sampled.permutation.size(); ++k)
      perm(static_cast<Eigen::Index>(k), 0) = static_cast<double>(sampled.permutation[k]);
    emit_csv(perm, "permutation.csv", {"original_column"});
  }

  std::vector<Matrix> reconstructions;
  for (const KernelSpec& kernel : cfg.kernels) {
    const std::string kname = kernel.name();
    KedmdModel model;
    try {
      model = fit(pairs.x, pairs.y, kernel, cfg.fit);
    } catch (const Error& e) {
      throw Error(e.kind(), "fit [" + kname + "]: " + e.what());
    }
    KernelOutcome outcome;
    outcome.kernel = kernel;
    outcome.rank = model.rank;
    outcome.dominant = dominant_filter(model, cfg.dominant_tol);

    Matrix recon(provided.rows(), provided.cols());
    double worst_imag_ratio = 0.0;
    for (std::size_t m = 0; m < columns; ++m) {
      const Reconstruction r = reconstruct(model, m);
      recon.col(static_cast<Eigen::Index>(m)) = r.values;
      const double scale = r.values.norm();
      if (scale > 0.0) worst_imag_ratio = std::max(worst_imag_ratio, r.imag_norm / scale);
    }
    reconstructions.push_back(recon);
    emit_pgm(recon, "reconstruction_" + kname + ".pgm");

    Matrix eig(model.eigenvalues.size(), 2);
    eig.col(0) = model.eigenvalues.real();
    eig.col(1) = model.eigenvalues.imag();
    emit_csv(eig, "eigenvalues_" + kname + ".csv", {"re", "im"});

    const std::string prefix = "kernel." + kname + ".";
    text << prefix << "sigma=" << format_double(kernel.sigma) << "\n";
    text << prefix << "rank=" << model.rank << "\n";
    text << prefix << "mode_residual=" << format_double(model.mode_residual) << "\n";
    text << prefix << "max_imag_ratio=" << format_double(worst_imag_ratio) << "\n";
    text << prefix << "dominant=" << join_indices(outcome.dominant) << "\n";

    for (std::size_t m : cfg.snapshots) {
      const Vector truth = truth_column(m);
      const Vector rec = recon.col(static_cast<Eigen::Index>(m));
      const EweReport report = ewe(rec, truth, cfg.zero_tol);
      outcome.mean_ewe.push_back(report.mean);
      outcome.max_ewe.push_back(report.max);
      emit_csv(report.per_element, "ewe_" + snapshot_tag(m) + "_" + kname + ".csv", {"ewe"});
      const std::string sp = prefix + "snapshot_" + snapshot_tag(m) + ".";
      text << sp << "mean_ewe=" << format_double(report.mean) << "\n";
      text << sp << "max_ewe=" << format_double(report.max) << "\n";
      text << sp << "masked=" << report.masked_count << "\n";
    }
    summary.kernels.push_back(std::move(outcome));
  }

  for (std::size_t m : cfg.snapshots) {
    const auto col = static_cast<Eigen::Index>(m);
    const Vector truth = truth_column(m);
    // Alignment check: the permutation must point at the provided column.
    const EweReport self = ewe(truth, provided.col(col), cfg.zero_tol);
    text << "snapshot_" << snapshot_tag(m) << ".alignment_ewe=" << format_double(self.mean) << "\n";

    Matrix table(provided.rows(), 2 + static_cast<Eigen::Index>(cfg.kernels.size()));
    std::vector<std::string> header = {"actual", "irregular_sparse"};
    table.col(0) = actual.col(col);
    table.col(1) = provided.col(col);
    for (std::size_t k = 0; k < cfg.kernels.size(); ++k) {
      table.col(2 + static_cast<Eigen::Index>(k)) = reconstructions[k].col(col);
      header.push_back(cfg.kernels[k].name());
    }
    emit_csv(table, "snapshot_" + snapshot_tag(m) + ".csv", header);
    for (Eigen::Index c = 0; c < table.cols(); ++c)
      emit_pgm(table.col(c).transpose(),
               "snapshot_" + snapshot_tag(m) + "_" + header[static_cast<std::size_t>(c)] + ".pgm");
  }

  double best = std::numeric_limits<double>::infinity();
  std::size_t n_best = 0;
  for (const auto& outcome : summary.kernels) {
    double avg = 0.0;
    for (double v : outcome.mean_ewe) avg += v;
    avg /= std::max<std::size_t>(1, outcome.mean_ewe.size());
    if (avg < best) {
      best = avg;
      n_best = 1;
      summary.better_kernel = outcome.kernel.name();
    } else if (avg == best) {
      ++n_best;
    }
  }
  if (n_best != 1) summary.better_kernel = "tie";
  text << "better_kernel=" << summary.better_kernel << "\n";

  summary.text = text.str();
  write_text(out_dir / "summary.txt", summary.text);
  summary.artifacts.push_back(out_dir / "summary.txt");
  return summary;
}

RkhsVerifyResult rkhs_verify(const Config& cfg) {
  McIntegrator ctx;
  ctx.n_samples = static_cast<std::size_t>(cfg.get_int("rkhs.samples", 1'000'000));
  ctx.seed = static_cast<std::uint64_t>(cfg.get_int("rkhs.seed", 20240229));
  ctx.chunk_size = static_cast<std::size_t>(cfg.get_int("rkhs.chunk_size", 1 << 14));
  ctx.proposal_scale = cfg.get_double("rkhs.proposal_scale", 2.0);
  ctx.sigma = cfg.get_double("rkhs.sigma", 1.0);
  ctx.dim = 1;
  ctx.validate();
  const int m_max = static_cast<int>(cfg.get_int("rkhs.m_max", 10));
  const std::vector<double> sigmas = parse_doubles(cfg.get_list("rkhs.sigmas", {"0.5", "1", "2"}));
  const std::vector<double> radii = parse_doubles(cfg.get_list("rkhs.radii", {"2", "4", "8"}));

  std::ostringstream out;
  bool all = true;
  const auto check = [&](const std::string& name, bool pass) {
    out << "check." << name << ".pass=" << (pass ? "true" : "false") << "\n";
    all = all && pass;
  };

  out << "samples=" << ctx.n_samples << "\nseed=" << ctx.seed << "\n";
  out << "sigma=" << format_double(ctx.sigma) << "\n";

  // Orthonormality of e_0..e_4.
  {
    double worst = 0.0;
    for (double s : sigmas) {
      McIntegrator c = ctx;
      c.sigma = s;
      std::vector<HlFunction> basis;
      for (int n = 0; n <= 4; ++n) basis.push_back(orthonormal_basis_1d(n, s));
      double dev = 0.0;
      for (int n = 0; n <= 4; ++n)
        for (int m = 0; m <= 4; ++m) {
          const cdouble v = mc_inner_product(basis[n], basis[m], c).value;
          dev = std::max(dev, std::abs(v - (n == m ? 1.0 : 0.0)));
        }
      out << "orthonormality.sigma_" << format_double(s) << ".max_deviation=" << format_double(dev)
          << "\n";
      worst = std::max(worst, dev);
    }
    check("orthonormality", worst < 0.05);
  }

  // Kernel norm bound on a grid of real points.
  {
    bool ok = true;
    for (double x : {0.0, 0.5, 1.0, 2.0}) {
      const NormEstimate est = laplacian_kernel_norm(CVector::Constant(1, x), ctx);
      out << "norm_bound.x_" << format_double(x) << "=" << format_double(est.value) << ","
          << format_double(est.std_error) << "," << format_double(est.bound) << "\n";
      ok = ok && est.value <= est.bound + 3.0 * est.std_error;
      if (x == 0.0) ok = ok && std::abs(est.value - std::pow(3.0, -ctx.dim)) < 0.01;
    }
    check("norm_bound", ok);
  }

  // Basis expansion of the reproducing kernel.
  {
    const double at_sigma = kernel_series_check(ctx.sigma, ctx.sigma, ctx.sigma, 12);
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    std::vector<double> residuals;
    for (int n = 1; n <= 12; ++n) {
      const double r = kernel_series_check(2.0 * ctx.sigma, 2.0 * ctx.sigma, ctx.sigma, n);
      residuals.push_back(r);
      // Stop comparing once the residual has reached rounding level.
      if (prev > 1e-13 && !(r < prev)) decreasing = false;
      prev = r;
    }
    out << "kernel_series.at_sigma_12_terms=" << format_double(at_sigma) << "\n";
    out << "kernel_series.at_2sigma=" << join_doubles(residuals) << "\n";
    check("kernel_series", at_sigma < 1e-10 && decreasing);
  }

  // Compactness statistic along the real axis.
  {
    const AffineMap phi = AffineMap::scalar(0.5);
    std::vector<double> values;
    for (double z : {10.0, 20.0, 40.0, 80.0})
      values.push_back(pi_statistic(CVector::Constant(1, z), phi, ctx.sigma));
    bool decreasing = true;
    for (std::size_t i = 1; i < values.size(); ++i) decreasing = decreasing && values[i] < values[i - 1];
    out << "pi_statistic.label=lim_{|z|_2->0} Pi_z(phi;sigma)=0, evaluated along |z|_2 -> infinity\n";
    out << "pi_statistic.values=" << join_doubles(values) << "\n";
    check("pi_decay", decreasing && values.back() < 1e-4);
  }

  // Closability contrast.
  {
    const AffineMap phi = AffineMap::scalar(0.5);
    const HlProbeReport hl = closability_probe_hl(phi, m_max, ctx);
    std::istringstream lines(hl.serialize());
    for (std::string line; std::getline(lines, line);) out << "closability_hl." << line << "\n";
    check("closability_hl", hl.verdict == "bounded");

    const GrbfProbeReport grbf = closability_probe_grbf(phi, radii, ctx);
    std::istringstream glines(grbf.serialize());
    for (std::string line; std::getline(glines, line);) out << "closability_grbf." << line << "\n";
    check("closability_grbf", grbf.verdict == "divergent" && grbf.final_ratio > 1.5);
  }

  out << "all_passed=" << (all ? "true" : "false") << "\n";
  return {all, out.str()};
}

}  // namespace lapdmd
