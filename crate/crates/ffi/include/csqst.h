#ifndef CSQST_H
#define CSQST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status returned by every fallible call.
typedef enum CsqstStatus {
  CSQST_STATUS_OK = 0,
  CSQST_STATUS_NULL_POINTER = 1,
  CSQST_STATUS_INVALID_ARGUMENT = 2,
  CSQST_STATUS_DIMENSION_MISMATCH = 3,
  CSQST_STATUS_NOT_HERMITIAN = 4,
  CSQST_STATUS_NOT_PSD = 5,
  CSQST_STATUS_CONFIG = 6,
  CSQST_STATUS_IO = 7,
  CSQST_STATUS_SERIALIZATION = 8,
  CSQST_STATUS_BUFFER_TOO_SMALL = 9,
  CSQST_STATUS_PANIC = 10,
} CsqstStatus;

typedef struct CsqstPlan CsqstPlan;

typedef struct CsqstRecord CsqstRecord;

typedef struct CsqstResult CsqstResult;

typedef struct CsqstState CsqstState;

typedef struct CsqstSolverOptions {
  size_t max_iters;
  double rel_obj_tol;
  double kkt_tol;
  double admm_rho;
  bool restart;
  bool exact_step;
} CsqstSolverOptions;

// Solver diagnostics for a finished reconstruction.
typedef struct CsqstResultInfo {
  size_t iterations;
  double kkt_residual;
  double final_objective;
  bool converged;
  bool degenerate;
} CsqstResultInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` as a
// NUL-terminated string, truncating if needed. Returns the full message
// length in bytes, excluding the terminator.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t csqst_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *csqst_version(void);

struct CsqstSolverOptions csqst_solver_options_default(void);

// Haar-random pure state on `n` qubits.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum CsqstStatus csqst_state_haar_pure(size_t n, uint64_t seed, struct CsqstState **out);

// Random rank-`r` mixed state on `n` qubits.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum CsqstStatus csqst_state_rank_r(size_t n, size_t r, uint64_t seed, struct CsqstState **out);

// # Safety
// `out` must be a valid pointer to a handle slot.
enum CsqstStatus csqst_state_w(size_t n, struct CsqstState **out);

// Density matrix from row-major real and imaginary parts. Fails unless the
// matrix is Hermitian, PSD and of unit trace.
//
// # Safety
// `re` and `im` must each point to `dim * dim` readable doubles.
enum CsqstStatus csqst_state_from_parts(size_t dim,
                                        const double *re,
                                        const double *im,
                                        struct CsqstState **out);

// Matrix dimension, or 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t csqst_state_dim(const struct CsqstState *state);

// # Safety
// `re` and `im` must each point to `len` writable doubles.
enum CsqstStatus csqst_state_copy_matrix(const struct CsqstState *state,
                                         double *re,
                                         double *im,
                                         size_t len);

// # Safety
// `state` must be null or a handle not yet freed.
void csqst_state_free(struct CsqstState *state);

// `m` distinct non-identity Pauli strings on `n` qubits, drawn uniformly.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum CsqstStatus csqst_plan_random(size_t n, size_t m, uint64_t seed, struct CsqstPlan **out);

// Plan from Pauli indices. Index bits `2q` and `2q + 1` hold the x and z
// parts of qubit `q`'s letter.
//
// # Safety
// `indices` must point to `m` readable values.
enum CsqstStatus csqst_plan_from_indices(size_t n,
                                         const uint64_t *indices,
                                         size_t m,
                                         struct CsqstPlan **out);

// Number of settings, or 0 for a null handle.
//
// # Safety
// `plan` must be null or a live handle.
size_t csqst_plan_len(const struct CsqstPlan *plan);

// # Safety
// `out` must point to `len` writable values.
enum CsqstStatus csqst_plan_indices(const struct CsqstPlan *plan, uint64_t *out, size_t len);

// # Safety
// `plan` must be null or a handle not yet freed.
void csqst_plan_free(struct CsqstPlan *plan);

// Simulates `y = estimate + v + z`. `shots == 0` means exact expectations.
// `z` may be null for no dense noise.
//
// # Safety
// `v` and `z` (when non-null) must point to `m` readable doubles, where
// `m` is the plan length.
enum CsqstStatus csqst_record_acquire(const struct CsqstPlan *plan,
                                      const struct CsqstState *state,
                                      uint64_t shots,
                                      const double *v,
                                      const double *z,
                                      size_t m,
                                      uint64_t seed,
                                      struct CsqstRecord **out);

// Record holding measured data only, for reconstructing external data.
//
// # Safety
// `y` must point to `m` readable doubles.
enum CsqstStatus csqst_record_from_data(const struct CsqstPlan *plan,
                                        const double *y,
                                        size_t m,
                                        struct CsqstRecord **out);

// # Safety
// `record` must be null or a live handle.
size_t csqst_record_len(const struct CsqstRecord *record);

// # Safety
// `out` must point to `len` writable doubles.
enum CsqstStatus csqst_record_copy_y(const struct CsqstRecord *record, double *out, size_t len);

// # Safety
// `record` must be null or a handle not yet freed.
void csqst_record_free(struct CsqstRecord *record);

// Joint trace and l1 regularized estimator. `opts` may be null for defaults.
//
// # Safety
// Handles must be live; `out` must be a valid handle slot.
enum CsqstStatus csqst_solve_regularized(const struct CsqstRecord *record,
                                         double tau1,
                                         double tau2,
                                         const struct CsqstSolverOptions *opts,
                                         struct CsqstResult **out);

// Trace-regularized least squares ignoring outliers.
//
// # Safety
// Handles must be live; `out` must be a valid handle slot.
enum CsqstStatus csqst_solve_matrix_lasso(const struct CsqstRecord *record,
                                          double mu,
                                          const struct CsqstSolverOptions *opts,
                                          struct CsqstResult **out);

// Minimum trace subject to `||v||_1 <= l1_budget` and residual `<= delta`.
//
// # Safety
// Handles must be live; `out` must be a valid handle slot.
enum CsqstStatus csqst_solve_constrained(const struct CsqstRecord *record,
                                         double l1_budget,
                                         double delta,
                                         const struct CsqstSolverOptions *opts,
                                         struct CsqstResult **out);

// Weighted trace plus l1 subject to residual `<= delta`.
//
// # Safety
// Handles must be live; `out` must be a valid handle slot.
enum CsqstStatus csqst_solve_penalized(const struct CsqstRecord *record,
                                       double lambda1,
                                       double lambda2,
                                       double delta,
                                       const struct CsqstSolverOptions *opts,
                                       struct CsqstResult **out);

// # Safety
// `result` must be null or a live handle.
size_t csqst_result_dim(const struct CsqstResult *result);

// Length of the outlier estimate, or 0 for a null handle.
//
// # Safety
// `result` must be null or a live handle.
size_t csqst_result_len(const struct CsqstResult *result);

// Copies the normalized estimate.
//
// # Safety
// `re` and `im` must each point to `len` writable doubles.
enum CsqstStatus csqst_result_copy_rho(const struct CsqstResult *result,
                                       double *re,
                                       double *im,
                                       size_t len);

// # Safety
// `out` must point to `len` writable doubles.
enum CsqstStatus csqst_result_copy_v(const struct CsqstResult *result, double *out, size_t len);

// # Safety
// `result` must be a live handle and `info` writable.
enum CsqstStatus csqst_result_info(const struct CsqstResult *result, struct CsqstResultInfo *info);

// Fidelity between the estimate and `truth`.
//
// # Safety
// Handles must be live and `out` writable.
enum CsqstStatus csqst_result_fidelity(const struct CsqstResult *result,
                                       const struct CsqstState *truth,
                                       double *out);

// # Safety
// `result` must be null or a handle not yet freed.
void csqst_result_free(struct CsqstResult *result);

// # Safety
// Handles must be live and `out` writable.
enum CsqstStatus csqst_fidelity(const struct CsqstState *a,
                                const struct CsqstState *b,
                                double *out);

// Runs an experiment config given as JSON and writes `results.csv`,
// `aggregate.csv` and `run_meta.json` into `out_dir`.
//
// # Safety
// Both arguments must be NUL-terminated UTF-8 strings.
enum CsqstStatus csqst_run_config_json(const char *config_json, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CSQST_H */
