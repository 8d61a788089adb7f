#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lapdmd/dynamics.hpp"
#include "lapdmd/io.hpp"
#include "lapdmd/kedmd.hpp"
#include "lapdmd/kernels.hpp"
#include "lapdmd/sampling.hpp"

namespace lapdmd {

enum class SourceKind { Generate, LoadCsv };

struct SourceSpec {
  SourceKind kind = SourceKind::Generate;
  std::string system = "burgers";  // burgers, lorenz63, rossler, duffing
  std::filesystem::path path;      // LoadCsv
  double dt = 0.0;                 // 0: system default
  std::size_t snapshots = 0;       // ODE column count, 0: system default
  std::vector<double> x0;          // ODE initial state, empty: system default
  BurgersSetup burgers;
};

struct ExperimentConfig {
  std::string name = "experiment";
  SourceSpec source;
  std::vector<KernelSpec> kernels;
  SamplingPlan sampling;
  FitOptions fit;
  std::vector<std::size_t> snapshots;
  std::filesystem::path out_dir = "out";
  double zero_tol = 1e-12;
  double dominant_tol = 0.05;

  /// Reads every experiment key from cfg, resolving relative source paths
  /// against the config file's directory. Throws on invalid values or a
  /// missing input file.
  static ExperimentConfig from_config(const Config& cfg);
};

/// Produces the raw data matrix described by the source section.
DataMatrix generate_source(const SourceSpec& source);

/// Sampling plan from the `sampling.*` keys; n_keep defaults to `columns`.
SamplingPlan sampling_plan_from_config(const Config& cfg, std::size_t columns);

struct KernelOutcome {
  KernelSpec kernel;
  std::size_t rank = 0;
  std::vector<double> mean_ewe;  // per requested snapshot
  std::vector<double> max_ewe;
  std::vector<std::size_t> dominant;
};

struct RunSummary {
  std::vector<KernelOutcome> kernels;
  std::string better_kernel;  // lowest mean EWE averaged over snapshots, or "tie"
  std::vector<std::filesystem::path> artifacts;
  std::string text;           // key=value summary, also written to summary.txt
};

/// source -> shuffle -> partial -> reshape -> fit per kernel -> reconstruct
/// -> EWE against the permutation-aligned ground truth -> artifacts.
RunSummary run_experiment(const ExperimentConfig& cfg);

struct RkhsVerifyResult {
  bool all_passed = false;
  std::string report;  // key=value lines
};

/// Runs the RKHS probe suite; parameters from the `rkhs.*` keys.
RkhsVerifyResult rkhs_verify(const Config& cfg);

}  // namespace lapdmd
