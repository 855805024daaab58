#ifndef QCURV_H
#define QCURV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Scalar constants exposed through [`qcurv_constant`].
typedef enum QcurvConstant {
  QCURV_CONSTANT_TWO_STAR = 0,
  QCURV_CONSTANT_C_NK = 1,
  QCURV_CONSTANT_OMEGA_N = 2,
  QCURV_CONSTANT_QH = 3,
  QCURV_CONSTANT_K_NK = 4,
} QcurvConstant;

// Status codes; nonzero means the output arguments are untouched.
typedef enum QcurvStatus {
  QCURV_STATUS_OK = 0,
  QCURV_STATUS_INVALID_ARGUMENT = 1,
  QCURV_STATUS_INVALID_CONFIG = 2,
  QCURV_STATUS_SOLVER_FAILURE = 3,
  QCURV_STATUS_INTERNAL = 4,
} QcurvStatus;

// Opaque handle: sphere constants, operator spectrum and the zonal grid for
// one (n, k, band limit) triple.
typedef struct QcurvContext QcurvContext;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a context for S^n with a 2k-th order operator at band limit
// `l_max`. On success writes an owned pointer to `out`; release it with
// [`qcurv_context_free`].
//
// # Safety
// `out` must be a valid pointer.
enum QcurvStatus qcurv_context_new(uint32_t n, uint32_t k, size_t l_max, struct QcurvContext **out);

// Release a context created by [`qcurv_context_new`]. Null is a no-op.
//
// # Safety
// `handle` must be null or a pointer previously returned by
// [`qcurv_context_new`] that has not been freed.
void qcurv_context_free(struct QcurvContext *handle);

// Read one scalar constant of the context.
//
// # Safety
// `handle` and `out` must be valid pointers.
enum QcurvStatus qcurv_constant(const struct QcurvContext *handle,
                                enum QcurvConstant which,
                                double *out);

// Operator eigenvalue on degree-`l` zonal harmonics.
//
// # Safety
// `handle` and `out` must be valid pointers.
enum QcurvStatus qcurv_eigenvalue(const struct QcurvContext *handle, size_t l, double *out);

// Relative sup-norm residual of the concentration-profile equation at the
// given `beta`, certifying the operator constants through the handle's grid.
//
// # Safety
// `handle` and `out` must be valid pointers.
enum QcurvStatus qcurv_bubble_residual(const struct QcurvContext *handle, double beta, double *out);

// Run a full scenario from a JSON config (the CLI schema) and hand back the
// report JSON as an owned C string; release it with [`qcurv_string_free`].
//
// # Safety
// `config_json` must be a valid NUL-terminated string and `out` a valid
// pointer.
enum QcurvStatus qcurv_run_scenario_json(const char *config_json, char **out);

// Release a string returned by [`qcurv_run_scenario_json`]. Null is a no-op.
//
// # Safety
// `s` must be null or an unreleased string returned by this library.
void qcurv_string_free(char *s);

// Static description of a status code.
const char *qcurv_status_message(enum QcurvStatus status);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* QCURV_H */
