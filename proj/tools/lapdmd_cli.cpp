// Command line front end. Talks to the toolkit exclusively through the C API.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lapdmd/lapdmd.h"

namespace {

struct ConfigDeleter {
  void operator()(lapdmd_config* c) const { lapdmd_config_free(c); }
};
struct MatrixDeleter {
  void operator()(lapdmd_matrix* m) const { lapdmd_matrix_free(m); }
};
struct ModelDeleter {
  void operator()(lapdmd_model* m) const { lapdmd_model_free(m); }
};
using ConfigPtr = std::unique_ptr<lapdmd_config, ConfigDeleter>;
using MatrixPtr = std::unique_ptr<lapdmd_matrix, MatrixDeleter>;
using ModelPtr = std::unique_ptr<lapdmd_model, ModelDeleter>;

struct Failure {
  int code;
};

void check(lapdmd_status status, const char* stage) {
  if (status == LAPDMD_OK) return;
  std::fprintf(stderr, "lapdmd: %s failed: %s\n", stage, lapdmd_last_error());
  throw Failure{static_cast<int>(status)};
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  lapdmd_string_free(s);
  return out;
}

// Options shared by every subcommand; each maps onto a config key.
struct CommonOptions {
  std::string config;
  std::optional<long long> seed;
  std::optional<std::string> kernel;
  std::optional<double> sigma;
  std::optional<double> rank_tol;
  std::string out;
  std::vector<std::string> sets;

  void attach(CLI::App* app, const std::string& out_help) {
    app->add_option("--config", config, "key = value configuration file");
    app->add_option("--seed", seed, "Shuffle seed (sampling.seed)");
    app->add_option("--kernel", kernel, "Kernel list, e.g. laplacian,grbf (kernels)");
    app->add_option("--sigma", sigma, "Kernel bandwidth (kernel.sigma)");
    app->add_option("--rank-tol", rank_tol, "Relative singular value cutoff (fit.rank_tol)");
    app->add_option("--out", out, out_help);
    app->add_option("--set", sets, "Extra KEY=VALUE config override (repeatable)");
  }

  ConfigPtr load() const {
    lapdmd_config* raw = nullptr;
    if (config.empty())
      check(lapdmd_config_create(&raw), "config");
    else
      check(lapdmd_config_load(config.c_str(), &raw), "config");
    ConfigPtr cfg(raw);
    const auto set = [&](const std::string& k, const std::string& v) {
      check(lapdmd_config_set(cfg.get(), k.c_str(), v.c_str()), "config override");
    };
    if (seed) set("sampling.seed", std::to_string(*seed));
    if (kernel) set("kernels", *kernel);
    if (sigma) set("kernel.sigma", fmt(*sigma));
    if (rank_tol) set("fit.rank_tol", fmt(*rank_tol));
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "lapdmd: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
        throw Failure{LAPDMD_ERR_VALIDATION};
      }
      set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
  }

  static std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
};

MatrixPtr load_matrix(const std::string& path) {
  lapdmd_matrix* m = nullptr;
  check(lapdmd_matrix_load_csv(path.c_str(), &m), "load csv");
  return MatrixPtr(m);
}

void set_key(lapdmd_config* cfg, const std::string& k, const std::string& v) {
  check(lapdmd_config_set(cfg, k.c_str(), v.c_str()), "config override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laplacian-kernel extended DMD toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lapdmd_version()));

  // generate
  CommonOptions gen_opts;
  std::optional<std::string> gen_system;
  std::optional<long long> gen_snapshots;
  std::optional<double> gen_dt;
  auto* gen = app.add_subcommand("generate", "Simulate a governing equation into a CSV");
  gen_opts.attach(gen, "Output CSV path");
  gen->add_option("--system", gen_system, "burgers, lorenz63, rossler or duffing");
  gen->add_option("--snapshots", gen_snapshots, "Number of ODE snapshots");
  gen->add_option("--dt", gen_dt, "ODE sampling interval");

  // sample
  CommonOptions sample_opts;
  std::string sample_in, sample_perm;
  std::optional<long long> sample_keep;
  std::optional<std::string> sample_reshape;
  bool sample_no_shuffle = false;
  auto* sample = app.add_subcommand("sample", "Shuffle, truncate and reshape snapshot columns");
  sample_opts.attach(sample, "Output CSV path");
  sample->add_option("--in", sample_in, "Input CSV")->required();
  sample->add_option("--n-keep", sample_keep, "Partial rank (columns kept)");
  sample->add_option("--reshape", sample_reshape, "ROWSxCOLS");
  sample->add_flag("--no-shuffle", sample_no_shuffle, "Keep the time order");
  sample->add_option("--perm-out", sample_perm, "Write the column permutation here");

  // fit
  CommonOptions fit_opts;
  std::string fit_in;
  std::optional<long long> fit_max_rank;
  auto* fit = app.add_subcommand("fit", "Fit a KeDMD model on a snapshot CSV");
  fit_opts.attach(fit, "Output model path");
  fit->add_option("--in", fit_in, "Snapshot CSV (columns in provided order)")->required();
  fit->add_option("--max-rank", fit_max_rank, "Hard rank cap");

  // reconstruct
  CommonOptions rec_opts;
  std::string rec_model;
  std::vector<long long> rec_snapshots;
  auto* rec = app.add_subcommand("reconstruct", "Reconstruct snapshots from a saved model");
  rec_opts.attach(rec, "Output CSV path (one column per snapshot)");
  rec->add_option("--model", rec_model, "Model file written by fit")->required();
  rec->add_option("--snapshot", rec_snapshots, "Snapshot index (repeatable)")->required();

  // ewe
  CommonOptions ewe_opts;
  std::string ewe_rec, ewe_act;
  double ewe_zero_tol = 1e-12;
  auto* ewe = app.add_subcommand("ewe", "Element-wise error between two CSVs");
  ewe_opts.attach(ewe, "Per-element error CSV path");
  ewe->add_option("--reconstructed", ewe_rec, "Reconstructed values CSV")->required();
  ewe->add_option("--actual", ewe_act, "Ground truth CSV")->required();
  ewe->add_option("--zero-tol", ewe_zero_tol, "Mask entries with |actual| <= tol");

  // run
  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Full reconstruction experiment");
  run_opts.attach(run, "Artifact directory (report.out)");

  // rkhs-verify
  CommonOptions rkhs_opts;
  std::optional<long long> rkhs_samples;
  auto* rkhs = app.add_subcommand("rkhs-verify", "Monte-Carlo verification of the RKHS probes");
  rkhs_opts.attach(rkhs, "Write the report here instead of stdout");
  rkhs->add_option("--samples", rkhs_samples, "Monte-Carlo samples per estimate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : LAPDMD_ERR_VALIDATION;
  }

  try {
    if (*gen) {
      auto cfg = gen_opts.load();
      if (gen_system) set_key(cfg.get(), "source.system", *gen_system);
      if (gen_snapshots) set_key(cfg.get(), "source.snapshots", std::to_string(*gen_snapshots));
      if (gen_dt) set_key(cfg.get(), "source.dt", CommonOptions::fmt(*gen_dt));
      lapdmd_matrix* m = nullptr;
      check(lapdmd_generate(cfg.get(), &m), "generate");
      MatrixPtr data(m);
      const std::string out = gen_opts.out.empty() ? "data.csv" : gen_opts.out;
      check(lapdmd_matrix_save_csv(data.get(), out.c_str()), "write csv");
      std::printf("wrote %s (%zux%zu)\n", out.c_str(), lapdmd_matrix_rows(data.get()),
                  lapdmd_matrix_cols(data.get()));
    } else if (*sample) {
      auto cfg = sample_opts.load();
      if (sample_keep) set_key(cfg.get(), "sampling.n_keep", std::to_string(*sample_keep));
      if (sample_reshape) set_key(cfg.get(), "sampling.reshape", *sample_reshape);
      if (sample_no_shuffle) set_key(cfg.get(), "sampling.shuffle", "false");
      auto input = load_matrix(sample_in);
      std::vector<size_t> perm(lapdmd_matrix_cols(input.get()));
      lapdmd_matrix* m = nullptr;
      check(lapdmd_sample(input.get(), cfg.get(), &m, perm.data()), "sample");
      MatrixPtr out(m);
      const std::string path = sample_opts.out.empty() ? "sampled.csv" : sample_opts.out;
      check(lapdmd_matrix_save_csv(out.get(), path.c_str()), "write csv");
      if (!sample_perm.empty()) {
        std::vector<double> col(perm.begin(), perm.end());
        lapdmd_matrix* pm = nullptr;
        check(lapdmd_matrix_create(col.size(), 1, col.data(), 1.0, &pm), "permutation");
        MatrixPtr pmat(pm);
        check(lapdmd_matrix_save_csv(pmat.get(), sample_perm.c_str()), "write permutation");
      }
      std::printf("wrote %s (%zux%zu)\n", path.c_str(), lapdmd_matrix_rows(out.get()),
                  lapdmd_matrix_cols(out.get()));
    } else if (*fit) {
      auto cfg = fit_opts.load();
      if (fit_max_rank) set_key(cfg.get(), "fit.max_rank", std::to_string(*fit_max_rank));
      auto data = load_matrix(fit_in);
      lapdmd_model* raw = nullptr;
      check(lapdmd_fit(data.get(), cfg.get(), &raw), "fit");
      ModelPtr model(raw);
      const std::string path = fit_opts.out.empty() ? "model.txt" : fit_opts.out;
      check(lapdmd_model_save(model.get(), path.c_str()), "write model");
      std::printf("wrote %s (rank %zu)\n", path.c_str(), lapdmd_model_rank(model.get()));
    } else if (*rec) {
      lapdmd_model* raw = nullptr;
      check(lapdmd_model_load(rec_model.c_str(), &raw), "load model");
      ModelPtr model(raw);
      const size_t n = lapdmd_model_state_dim(model.get());
      std::vector<double> values(n * rec_snapshots.size());
      for (size_t k = 0; k < rec_snapshots.size(); ++k) {
        if (rec_snapshots[k] < 0) {
          std::fprintf(stderr, "lapdmd: snapshot index must be non-negative\n");
          return LAPDMD_ERR_VALIDATION;
        }
        check(lapdmd_reconstruct(model.get(), static_cast<size_t>(rec_snapshots[k]),
                                 values.data() + k * n, nullptr),
              "reconstruct");
      }
      lapdmd_matrix* m = nullptr;
      check(lapdmd_matrix_create(n, rec_snapshots.size(), values.data(), 1.0, &m), "reconstruct");
      MatrixPtr out(m);
      const std::string path = rec_opts.out.empty() ? "reconstruction.csv" : rec_opts.out;
      check(lapdmd_matrix_save_csv(out.get(), path.c_str()), "write csv");
      std::printf("wrote %s\n", path.c_str());
    } else if (*ewe) {
      auto rec_m = load_matrix(ewe_rec);
      auto act_m = load_matrix(ewe_act);
      lapdmd_matrix* per = nullptr;
      lapdmd_ewe_summary summary{};
      check(lapdmd_ewe(rec_m.get(), act_m.get(), ewe_zero_tol, &per, &summary), "ewe");
      MatrixPtr per_element(per);
      if (!ewe_opts.out.empty())
        check(lapdmd_matrix_save_csv(per_element.get(), ewe_opts.out.c_str()), "write csv");
      std::printf("mean=%.17g\nmax=%.17g\nmasked=%zu\n", summary.mean, summary.max,
                  summary.masked_count);
    } else if (*run) {
      auto cfg = run_opts.load();
      if (!run_opts.out.empty()) set_key(cfg.get(), "report.out", run_opts.out);
      char* text = nullptr;
      check(lapdmd_run_experiment(cfg.get(), &text), "run");
      std::fputs(take_string(text).c_str(), stdout);
    } else if (*rkhs) {
      auto cfg = rkhs_opts.load();
      if (rkhs_samples) set_key(cfg.get(), "rkhs.samples", std::to_string(*rkhs_samples));
      if (rkhs_opts.seed) set_key(cfg.get(), "rkhs.seed", std::to_string(*rkhs_opts.seed));
      if (rkhs_opts.sigma) set_key(cfg.get(), "rkhs.sigma", CommonOptions::fmt(*rkhs_opts.sigma));
      char* text = nullptr;
      int passed = 0;
      check(lapdmd_rkhs_verify(cfg.get(), &text, &passed), "rkhs-verify");
      const std::string report = take_string(text);
      if (rkhs_opts.out.empty()) {
        std::fputs(report.c_str(), stdout);
      } else {
        std::FILE* f = std::fopen(rkhs_opts.out.c_str(), "wb");
        if (!f || std::fputs(report.c_str(), f) < 0) {
          if (f) std::fclose(f);
          std::fprintf(stderr, "lapdmd: cannot write %s\n", rkhs_opts.out.c_str());
          return LAPDMD_ERR_IO;
        }
        std::fclose(f);
      }
      return passed ? 0 : LAPDMD_ERR_NUMERICAL;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
