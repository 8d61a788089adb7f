/*
 * C interface to the lapdmd toolkit: Laplacian-kernel extended dynamic mode
 * decomposition and the accompanying RKHS verification probes.
 *
 * All objects are opaque handles released with the matching *_free call.
 * Every fallible call returns a lapdmd_status; on failure the message is
 * available from lapdmd_last_error() on the calling thread until the next
 * failing call. Strings returned through char** are owned by the caller and
 * released with lapdmd_string_free().
 */
#ifndef LAPDMD_H
#define LAPDMD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LAPDMD_BUILDING)
#    define LAPDMD_API __declspec(dllexport)
#  else
#    define LAPDMD_API __declspec(dllimport)
#  endif
#else
#  define LAPDMD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values match the command line exit codes. */
typedef enum lapdmd_status {
  LAPDMD_OK = 0,
  LAPDMD_ERR_VALIDATION = 1,
  LAPDMD_ERR_NUMERICAL = 2,
  LAPDMD_ERR_IO = 3
} lapdmd_status;

typedef struct lapdmd_config lapdmd_config;
typedef struct lapdmd_matrix lapdmd_matrix;
typedef struct lapdmd_model lapdmd_model;

typedef struct lapdmd_ewe_summary {
  double mean;
  double max;
  size_t masked_count;
} lapdmd_ewe_summary;

LAPDMD_API const char* lapdmd_version(void);
LAPDMD_API const char* lapdmd_last_error(void);
LAPDMD_API void lapdmd_string_free(char* s);

/* ---- configuration ------------------------------------------------------ */

LAPDMD_API lapdmd_status lapdmd_config_create(lapdmd_config** out);
LAPDMD_API lapdmd_status lapdmd_config_load(const char* path, lapdmd_config** out);
LAPDMD_API lapdmd_status lapdmd_config_set(lapdmd_config* cfg, const char* key,
                                           const char* value);
/* Copies the value into buf (NUL terminated, truncated to cap). Returns
 * LAPDMD_ERR_VALIDATION when the key is absent. */
LAPDMD_API lapdmd_status lapdmd_config_get(const lapdmd_config* cfg, const char* key,
                                           char* buf, size_t cap);
LAPDMD_API void lapdmd_config_free(lapdmd_config* cfg);

/* ---- data matrices ------------------------------------------------------ */

/* values are column-major, rows x cols. */
LAPDMD_API lapdmd_status lapdmd_matrix_create(size_t rows, size_t cols,
                                              const double* values, double dt,
                                              lapdmd_matrix** out);
LAPDMD_API lapdmd_status lapdmd_matrix_load_csv(const char* path, lapdmd_matrix** out);
LAPDMD_API lapdmd_status lapdmd_matrix_save_csv(const lapdmd_matrix* m, const char* path);
LAPDMD_API lapdmd_status lapdmd_matrix_save_pgm(const lapdmd_matrix* m, const char* path);
LAPDMD_API size_t lapdmd_matrix_rows(const lapdmd_matrix* m);
LAPDMD_API size_t lapdmd_matrix_cols(const lapdmd_matrix* m);
/* Column-major view, valid until the handle is freed. */
LAPDMD_API const double* lapdmd_matrix_data(const lapdmd_matrix* m);
LAPDMD_API void lapdmd_matrix_free(lapdmd_matrix* m);

/* ---- pipeline stages ---------------------------------------------------- */

/* Generates the source described by the source.* and burgers.* keys. */
LAPDMD_API lapdmd_status lapdmd_generate(const lapdmd_config* cfg, lapdmd_matrix** out);

/* Applies the sampling.* plan. permutation (may be NULL) receives
 * lapdmd_matrix_cols(in) entries: the original column index at each
 * shuffled position. */
LAPDMD_API lapdmd_status lapdmd_sample(const lapdmd_matrix* in, const lapdmd_config* cfg,
                                       lapdmd_matrix** out, size_t* permutation);

/* Fits the first kernel of `kernels` with kernel.sigma, fit.rank_tol and
 * fit.max_rank on successor pairs of the columns of data. */
LAPDMD_API lapdmd_status lapdmd_fit(const lapdmd_matrix* data, const lapdmd_config* cfg,
                                    lapdmd_model** out);
LAPDMD_API lapdmd_status lapdmd_model_load(const char* path, lapdmd_model** out);
LAPDMD_API lapdmd_status lapdmd_model_save(const lapdmd_model* model, const char* path);
LAPDMD_API size_t lapdmd_model_rank(const lapdmd_model* model);
LAPDMD_API size_t lapdmd_model_state_dim(const lapdmd_model* model);
/* re and im each receive lapdmd_model_rank() entries. */
LAPDMD_API void lapdmd_model_eigenvalues(const lapdmd_model* model, double* re, double* im);
LAPDMD_API void lapdmd_model_free(lapdmd_model* model);

/* out receives lapdmd_model_state_dim() entries; imag_norm may be NULL. */
LAPDMD_API lapdmd_status lapdmd_reconstruct(const lapdmd_model* model, size_t snapshot,
                                            double* out, double* imag_norm);

/* per_element (may be NULL) receives the per-entry error matrix. */
LAPDMD_API lapdmd_status lapdmd_ewe(const lapdmd_matrix* reconstructed,
                                    const lapdmd_matrix* actual, double zero_tol,
                                    lapdmd_matrix** per_element,
                                    lapdmd_ewe_summary* summary);

/* Full pipeline; writes artifacts under report.out. summary (may be NULL)
 * receives the key=value run summary. */
LAPDMD_API lapdmd_status lapdmd_run_experiment(const lapdmd_config* cfg, char** summary);

/* RKHS probe suite. report receives key=value lines; all_passed is set to
 * 1 when every probe met its threshold. */
LAPDMD_API lapdmd_status lapdmd_rkhs_verify(const lapdmd_config* cfg, char** report,
                                            int* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* LAPDMD_H */
