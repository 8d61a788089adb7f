#include "lapdmd/lapdmd.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "lapdmd/error.hpp"
#include "lapdmd/experiment.hpp"
#include "lapdmd/io.hpp"
#include "lapdmd/kedmd.hpp"
#include "lapdmd/metrics.hpp"
#include "lapdmd/sampling.hpp"

struct lapdmd_config {
  lapdmd::Config cfg;
};

struct lapdmd_matrix {
  lapdmd::DataMatrix data;
};

struct lapdmd_model {
  lapdmd::KedmdModel model;
};

namespace {

thread_local std::string last_error;

lapdmd_status fail(lapdmd_status status, const std::string& what) {
  last_error = what;
  return status;
}

// Runs body, mapping exceptions onto status codes.
template <typename Body>
lapdmd_status guarded(Body&& body) {
  try {
    body();
    return LAPDMD_OK;
  } catch (const lapdmd::Error& e) {
    return fail(static_cast<lapdmd_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(LAPDMD_ERR_NUMERICAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LAPDMD_ERR_NUMERICAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  auto* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lapdmd_status require(const void* p, const char* name) {
  if (p) return LAPDMD_OK;
  return fail(LAPDMD_ERR_VALIDATION, std::string(name) + " must not be NULL");
}

#define LAPDMD_REQUIRE(p)                                        \
  do {                                                           \
    if (const auto s_ = require((p), #p); s_ != LAPDMD_OK) return s_; \
  } while (0)

}  // namespace

extern "C" {

const char* lapdmd_version(void) { return "1.0.0"; }

const char* lapdmd_last_error(void) { return last_error.c_str(); }

void lapdmd_string_free(char* s) { delete[] s; }

lapdmd_status lapdmd_config_create(lapdmd_config** out) {
  LAPDMD_REQUIRE(out);
  return guarded([&] { *out = new lapdmd_config{}; });
}

lapdmd_status lapdmd_config_load(const char* path, lapdmd_config** out) {
  LAPDMD_REQUIRE(path);
  LAPDMD_REQUIRE(out);
  return guarded([&] { *out = new lapdmd_config{lapdmd::Config::load(path)}; });
}

lapdmd_status lapdmd_config_set(lapdmd_config* cfg, const char* key, const char* value) {
  LAPDMD_REQUIRE(cfg);
  LAPDMD_REQUIRE(key);
  LAPDMD_REQUIRE(value);
  return guarded([&] { cfg->cfg.set(key, value); });
}

lapdmd_status lapdmd_config_get(const lapdmd_config* cfg, const char* key, char* buf, size_t cap) {
  LAPDMD_REQUIRE(cfg);
  LAPDMD_REQUIRE(key);
  const auto v = cfg->cfg.get(key);
  if (!v) return fail(LAPDMD_ERR_VALIDATION, std::string("config key '") + key + "' is not set");
  if (buf && cap > 0) {
    const std::size_t n = std::min(cap - 1, v->size());
    std::memcpy(buf, v->data(), n);
    buf[n] = '\0';
  }
  return LAPDMD_OK;
}

void lapdmd_config_free(lapdmd_config* cfg) { delete cfg; }

lapdmd_status lapdmd_matrix_create(size_t rows, size_t cols, const double* values, double dt,
                                   lapdmd_matrix** out) {
  LAPDMD_REQUIRE(values);
  LAPDMD_REQUIRE(out);
  return guarded([&] {
    if (rows == 0 || cols == 0) throw lapdmd::validation_error("matrix: empty shape");
    if (!(dt > 0.0)) throw lapdmd::validation_error("matrix: dt must be positive");
    auto m = std::make_unique<lapdmd_matrix>();
    m->data.dt = dt;
    m->data.values = Eigen::Map<const lapdmd::Matrix>(values, static_cast<Eigen::Index>(rows),
                                                      static_cast<Eigen::Index>(cols));
    if (!m->data.values.allFinite()) throw lapdmd::validation_error("matrix: non-finite value");
    *out = m.release();
  });
}

lapdmd_status lapdmd_matrix_load_csv(const char* path, lapdmd_matrix** out) {
  LAPDMD_REQUIRE(path);
  LAPDMD_REQUIRE(out);
  return guarded([&] { *out = new lapdmd_matrix{lapdmd::load_csv(path)}; });
}

lapdmd_status lapdmd_matrix_save_csv(const lapdmd_matrix* m, const char* path) {
  LAPDMD_REQUIRE(m);
  LAPDMD_REQUIRE(path);
  return guarded([&] {
    const auto& labels = m->data.time_labels;
    const bool header_fits = labels.size() == m->data.cols();
    lapdmd::save_csv(m->data.values, path, header_fits ? labels : std::vector<std::string>{});
  });
}

lapdmd_status lapdmd_matrix_save_pgm(const lapdmd_matrix* m, const char* path) {
  LAPDMD_REQUIRE(m);
  LAPDMD_REQUIRE(path);
  return guarded([&] { lapdmd::save_heatmap_pgm(m->data.values, path); });
}

size_t lapdmd_matrix_rows(const lapdmd_matrix* m) { return m ? m->data.rows() : 0; }
size_t lapdmd_matrix_cols(const lapdmd_matrix* m) { return m ? m->data.cols() : 0; }
const double* lapdmd_matrix_data(const lapdmd_matrix* m) {
  return m ? m->data.values.data() : nullptr;
}
void lapdmd_matrix_free(lapdmd_matrix* m) { delete m; }

lapdmd_status lapdmd_generate(const lapdmd_config* cfg, lapdmd_matrix** out) {
  LAPDMD_REQUIRE(cfg);
  LAPDMD_REQUIRE(out);
  return guarded([&] {
    const auto exp = lapdmd::ExperimentConfig::from_config(cfg->cfg);
    *out = new lapdmd_matrix{lapdmd::generate_source(exp.source)};
  });
}

lapdmd_status lapdmd_sample(const lapdmd_matrix* in, const lapdmd_config* cfg,
                            lapdmd_matrix** out, size_t* permutation) {
  LAPDMD_REQUIRE(in);
  LAPDMD_REQUIRE(cfg);
  LAPDMD_REQUIRE(out);
  return guarded([&] {
    const auto plan = lapdmd::sampling_plan_from_config(cfg->cfg, in->data.cols());
    auto sampled = lapdmd::apply_plan(in->data, plan);
    if (permutation) std::copy(sampled.permutation.begin(), sampled.permutation.end(), permutation);
    *out = new lapdmd_matrix{std::move(sampled.matrix)};
  });
}

lapdmd_status lapdmd_fit(const lapdmd_matrix* data, const lapdmd_config* cfg, lapdmd_model** out) {
  LAPDMD_REQUIRE(data);
  LAPDMD_REQUIRE(cfg);
  LAPDMD_REQUIRE(out);
  return guarded([&] {
    const auto& c = cfg->cfg;
    const auto names = c.get_list("kernels", {"laplacian"});
    if (names.empty()) throw lapdmd::validation_error("fit: no kernel given");
    const auto kernel = lapdmd::KernelSpec::parse(names.front(), c.get_double("kernel.sigma", 1.0));
    lapdmd::FitOptions options;
    options.rank_tol = c.get_double("fit.rank_tol", options.rank_tol);
    if (const auto cap = c.get_int("fit.max_rank", 0); cap > 0)
      options.max_rank = static_cast<std::size_t>(cap);
    const auto pairs = lapdmd::build_pairs(data->data);
    *out = new lapdmd_model{lapdmd::fit(pairs.x, pairs.y, kernel, options)};
  });
}

lapdmd_status lapdmd_model_load(const char* path, lapdmd_model** out) {
  LAPDMD_REQUIRE(path);
  LAPDMD_REQUIRE(out);
  return guarded([&] { *out = new lapdmd_model{lapdmd::load_model(path)}; });
}

lapdmd_status lapdmd_model_save(const lapdmd_model* model, const char* path) {
  LAPDMD_REQUIRE(model);
  LAPDMD_REQUIRE(path);
  return guarded([&] { lapdmd::save_model(model->model, path); });
}

size_t lapdmd_model_rank(const lapdmd_model* model) { return model ? model->model.rank : 0; }

size_t lapdmd_model_state_dim(const lapdmd_model* model) {
  return model ? model->model.state_dim() : 0;
}

void lapdmd_model_eigenvalues(const lapdmd_model* model, double* re, double* im) {
  if (!model) return;
  for (Eigen::Index i = 0; i < model->model.eigenvalues.size(); ++i) {
    if (re) re[i] = model->model.eigenvalues(i).real();
    if (im) im[i] = model->model.eigenvalues(i).imag();
  }
}

void lapdmd_model_free(lapdmd_model* model) { delete model; }

lapdmd_status lapdmd_reconstruct(const lapdmd_model* model, size_t snapshot, double* out,
                                 double* imag_norm) {
  LAPDMD_REQUIRE(model);
  LAPDMD_REQUIRE(out);
  return guarded([&] {
    const auto r = lapdmd::reconstruct(model->model, snapshot);
    std::copy(r.values.data(), r.values.data() + r.values.size(), out);
    if (imag_norm) *imag_norm = r.imag_norm;
  });
}

lapdmd_status lapdmd_ewe(const lapdmd_matrix* reconstructed, const lapdmd_matrix* actual,
                         double zero_tol, lapdmd_matrix** per_element,
                         lapdmd_ewe_summary* summary) {
  LAPDMD_REQUIRE(reconstructed);
  LAPDMD_REQUIRE(actual);
  return guarded([&] {
    auto report = lapdmd::ewe(reconstructed->data.values, actual->data.values, zero_tol);
    if (summary) *summary = {report.mean, report.max, report.masked_count};
    if (per_element) {
      auto m = std::make_unique<lapdmd_matrix>();
      m->data.values = std::move(report.per_element);
      m->data.dt = actual->data.dt;
      *per_element = m.release();
    }
  });
}

lapdmd_status lapdmd_run_experiment(const lapdmd_config* cfg, char** summary) {
  LAPDMD_REQUIRE(cfg);
  return guarded([&] {
    const auto exp = lapdmd::ExperimentConfig::from_config(cfg->cfg);
    const auto result = lapdmd::run_experiment(exp);
    if (summary) *summary = copy_string(result.text);
  });
}

lapdmd_status lapdmd_rkhs_verify(const lapdmd_config* cfg, char** report, int* all_passed) {
  LAPDMD_REQUIRE(cfg);
  return guarded([&] {
    const auto result = lapdmd::rkhs_verify(cfg->cfg);
    if (report) *report = copy_string(result.report);
    if (all_passed) *all_passed = result.all_passed ? 1 : 0;
  });
}

}  // extern "C"
