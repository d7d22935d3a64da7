#ifndef QCLONING_H
#define QCLONING_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every function.
typedef enum QclStatus {
  QCL_STATUS_OK = 0,
  QCL_STATUS_NULL_POINTER = 1,
  QCL_STATUS_INVALID_ARGUMENT = 2,
  QCL_STATUS_INVALID_STATE = 3,
  QCL_STATUS_SIZE_LIMIT = 4,
  QCL_STATUS_INFEASIBLE = 5,
  QCL_STATUS_IO = 6,
  QCL_STATUS_SCHEMA = 7,
  QCL_STATUS_PANIC = 8,
} QclStatus;

// Opaque handle to a measurement.
typedef struct QclPovm QclPovm;

// Diagnostics from [`qcl_povm_validate`].
typedef struct QclPovmReport {
  size_t outcomes;
  double min_weight;
  double completeness_residual;
  double weight_sum;
  double expected_weight_sum;
  // 1 if the measurement is positive and complete, else 0.
  int32_t passed;
} QclPovmReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. The pointer
// stays valid until the next call into the library from the same thread.
const char *qcl_last_error(void);

// Single-particle fidelity of the optimal `n -> m` cloner.
//
// # Safety
// `out` must be null or point to writable memory for one `double`.
enum QclStatus qcl_cloner_fidelity(size_t d, size_t n, size_t m, double *out);

// Shrinking factor of the optimal `n -> m` cloner.
//
// # Safety
// `out` must be null or point to writable memory for one `double`.
enum QclStatus qcl_cloner_shrinking_factor(size_t d, size_t n, size_t m, double *out);

// Optimal estimation fidelity from `n` copies, `(n + 1)/(n + d)`.
//
// # Safety
// `out` must be null or point to writable memory for one `double`.
enum QclStatus qcl_estimation_fidelity(size_t d, size_t n, double *out);

// Shrinking factor of optimal estimation from `n` copies, `n/(n + d)`.
//
// # Safety
// `out` must be null or point to writable memory for one `double`.
enum QclStatus qcl_estimation_shrinking_factor(size_t d, size_t n, double *out);

// Simulates the `n -> m` cloner on `n` copies of the normalized state with
// amplitudes `re[k] + i im[k]`, `k < d`, and writes the single-particle
// fidelity.
//
// # Safety
// `re` and `im` must point to `d` readable doubles; `out` to one writable
// double.
enum QclStatus qcl_simulate_clone_fidelity(size_t d,
                                           size_t n,
                                           size_t m,
                                           const double *re,
                                           const double *im,
                                           double *out);

// Builds the deterministic design measurement on `n` copies.
//
// # Safety
// `out` must point to writable storage for one handle.
enum QclStatus qcl_povm_design(size_t d, size_t n, struct QclPovm **out);

// Loads a measurement from a JSON file.
//
// # Safety
// `path` must be a nul-terminated string; `out` writable storage for one handle.
enum QclStatus qcl_povm_load(const char *path, struct QclPovm **out);

// Parses a measurement from a nul-terminated JSON string.
//
// # Safety
// `json` must be a nul-terminated string; `out` writable storage for one handle.
enum QclStatus qcl_povm_from_json(const char *json, struct QclPovm **out);

// Writes a measurement to a JSON file.
//
// # Safety
// `povm` must be a live handle; `path` a nul-terminated string.
enum QclStatus qcl_povm_save(const struct QclPovm *povm, const char *path);

// Serializes a measurement. Release the string with [`qcl_string_free`].
//
// # Safety
// `povm` must be a live handle; `out` writable storage for one pointer.
enum QclStatus qcl_povm_to_json(const struct QclPovm *povm, char **out);

// Dimension, copy number and outcome count of a measurement.
//
// # Safety
// `povm` must be a live handle; each out pointer may be null.
enum QclStatus qcl_povm_shape(const struct QclPovm *povm, size_t *d, size_t *n, size_t *outcomes);

// Checks positivity and completeness.
//
// # Safety
// `povm` must be a live handle; `out` writable storage for one report.
enum QclStatus qcl_povm_validate(const struct QclPovm *povm, struct QclPovmReport *out);

// Haar-averaged estimation fidelity, computed exactly.
//
// # Safety
// `povm` must be a live handle; `out` writable storage for one double.
enum QclStatus qcl_povm_average_fidelity(const struct QclPovm *povm, double *out);

// Monte Carlo estimate of the Haar-averaged fidelity over `samples` inputs.
//
// # Safety
// `povm` must be a live handle; `mean` and `std_error` writable doubles.
enum QclStatus qcl_povm_average_fidelity_mc(const struct QclPovm *povm,
                                            uint64_t samples,
                                            uint64_t seed,
                                            double *mean,
                                            double *std_error);

// Estimation fidelity for one input state, amplitudes `re[k] + i im[k]`.
//
// # Safety
// `povm` must be a live handle; `re` and `im` point to `d` readable doubles
// where `d` is the measurement's dimension; `out` one writable double.
enum QclStatus qcl_povm_fidelity(const struct QclPovm *povm,
                                 const double *re,
                                 const double *im,
                                 double *out);

// Releases a handle. Null is ignored.
//
// # Safety
// `povm` must be null or a handle not yet freed.
void qcl_povm_free(struct QclPovm *povm);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void qcl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCLONING_H */
