#ifndef AUGPACK_H
#define AUGPACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum AugpackStatus {
  AUGPACK_STATUS_OK = 0,
  AUGPACK_STATUS_NULL_POINTER = 1,
  AUGPACK_STATUS_INVALID_UTF8 = 2,
  AUGPACK_STATUS_PARSE = 3,
  AUGPACK_STATUS_INVALID_INSTANCE = 4,
  AUGPACK_STATUS_CONFIG = 5,
  AUGPACK_STATUS_NUMERIC = 6,
  AUGPACK_STATUS_OUT_OF_RANGE = 7,
  AUGPACK_STATUS_PANIC = 8,
} AugpackStatus;

typedef enum AugpackSubroutineKind {
  AUGPACK_SUBROUTINE_KIND_GREEDY = 0,
  AUGPACK_SUBROUTINE_KIND_PRICE = 1,
  AUGPACK_SUBROUTINE_KIND_KNAPSACK_THRESHOLD = 2,
} AugpackSubroutineKind;

// Opaque packing instance.
typedef struct AugpackInstance AugpackInstance;

// Opaque switching-run trace.
typedef struct AugpackTrace AugpackTrace;

// Subroutine choice. `b_param`/`c_beta` apply to `Price`, the density
// bounds to `KnapsackThreshold`.
typedef struct AugpackSubroutineOptions {
  enum AugpackSubroutineKind kind;
  double b_param;
  double c_beta;
  double density_lower;
  double density_upper;
} AugpackSubroutineOptions;

typedef struct AugpackRound {
  uintptr_t j;
  double x_adv;
  double x_sub;
  double x_comb;
  bool used;
  double beta;
  double max_load_ratio;
} AugpackRound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length including the NUL, or
// 0 if there is no error.
//
// # Safety
// `buf` must be null or valid for `len` writable bytes.
uintptr_t augpack_last_error_message(char *buf, uintptr_t len);

// Parses an instance from its JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum AugpackStatus augpack_instance_from_json(const char *json, struct AugpackInstance **out);

// Square synthetic instance: entries uniform on [0, 1) rounded to 0 below
// `ell`, capacities uniform on (0, 1].
//
// # Safety
// `out` must be a valid pointer.
enum AugpackStatus augpack_instance_synthetic(uintptr_t n,
                                              double ell,
                                              uint64_t seed,
                                              struct AugpackInstance **out);

// Serializes an instance as JSON. Release the string with [`augpack_string_free`].
//
// # Safety
// `inst` must come from this library; `out` must be a valid pointer.
enum AugpackStatus augpack_instance_to_json(const struct AugpackInstance *inst, char **out);

// # Safety
// `s` must be null or a string returned by this library.
void augpack_string_free(char *s);

// Constraint count `m`, or 0 for a null handle.
//
// # Safety
// `inst` must be null or come from this library.
uintptr_t augpack_instance_rows(const struct AugpackInstance *inst);

// Column count `n`, or 0 for a null handle.
//
// # Safety
// `inst` must be null or come from this library.
uintptr_t augpack_instance_columns(const struct AugpackInstance *inst);

// # Safety
// `inst` must be null or come from this library, and is invalid afterwards.
void augpack_instance_free(struct AugpackInstance *inst);

// Offline optimum: exact simplex for linear objectives, Frank-Wolfe
// otherwise. Writes `n` values to `x_out` when it is non-null.
//
// # Safety
// `x_out` must be null or valid for `x_len` doubles; `opt_out` must be valid.
enum AugpackStatus augpack_solve(const struct AugpackInstance *inst,
                                 double *x_out,
                                 uintptr_t x_len,
                                 double *opt_out);

// Runs the switching algorithm with default mixing. `beta ≤ 0` uses the
// subroutine's reported β each round; otherwise β is fixed at `beta`.
//
// # Safety
// `advice` must be valid for `advice_len` doubles; `options` and `out` must be valid.
enum AugpackStatus augpack_run_switching(const struct AugpackInstance *inst,
                                         const double *advice,
                                         uintptr_t advice_len,
                                         const struct AugpackSubroutineOptions *options,
                                         double beta,
                                         struct AugpackTrace **out);

// Number of rounds, or 0 for a null handle.
//
// # Safety
// `trace` must be null or come from this library.
uintptr_t augpack_trace_len(const struct AugpackTrace *trace);

// Copies round `index` (0-based) into `out`.
//
// # Safety
// `trace` must come from this library; `out` must be valid.
enum AugpackStatus augpack_trace_round(const struct AugpackTrace *trace,
                                       uintptr_t index,
                                       struct AugpackRound *out);

// Objective values of the combined solution, the subroutine's solution and
// the advice. Any output pointer may be null.
//
// # Safety
// `trace` must come from this library; non-null outputs must be valid.
enum AugpackStatus augpack_trace_objectives(const struct AugpackTrace *trace,
                                            double *f_x,
                                            double *f_sub,
                                            double *f_advice);

// # Safety
// `trace` must be null or come from this library, and is invalid afterwards.
void augpack_trace_free(struct AugpackTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AUGPACK_H */
