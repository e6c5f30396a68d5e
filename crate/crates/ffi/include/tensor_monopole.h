#ifndef TENSOR_MONOPOLE_H
#define TENSOR_MONOPOLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum TmStatus {
  TM_STATUS_OK = 0,
  TM_STATUS_NULL_POINTER = 1,
  TM_STATUS_INVALID_PARAMETER = 2,
  TM_STATUS_NON_HERMITIAN = 3,
  TM_STATUS_NOT_CHIRAL = 4,
  TM_STATUS_DEGENERATE = 5,
  TM_STATUS_BRANCH_JUMP = 6,
  TM_STATUS_IMAGINARY_RESIDUE = 7,
  TM_STATUS_DEGENERACY_ON_SURFACE = 8,
  TM_STATUS_NOT_CONVERGED = 9,
  TM_STATUS_BUFFER_TOO_SMALL = 10,
  TM_STATUS_NUMERICAL = 11,
  TM_STATUS_PANIC = 12,
} TmStatus;

typedef enum TmConvention {
  TM_CONVENTION_CORRECTED = 0,
  TM_CONVENTION_MAIN_TEXT = 1,
} TmConvention;

typedef enum TmAxis {
  TM_AXIS_X = 0,
  TM_AXIS_Y = 1,
  TM_AXIS_Z = 2,
  TM_AXIS_W = 3,
} TmAxis;

typedef enum TmCubeMethod {
  TM_CUBE_METHOD_QUADRATURE = 0,
  TM_CUBE_METHOD_MONTE_CARLO = 1,
} TmCubeMethod;

/**
 * Opaque model handle.
 */
typedef struct TmModel TmModel;

typedef struct TmComplex {
  double re;
  double im;
} TmComplex;

typedef struct TmDegeneratePoint {
  double point[4];
  int8_t s1;
  int8_t s2;
  double residual;
  int32_t expected_charge;
} TmDegeneratePoint;

/**
 * `method`: 0 cube quadrature, 1 cube Monte-Carlo, 2 sphere Monte-Carlo.
 */
typedef struct TmChargeResult {
  double q_value;
  int64_t q_rounded;
  double error_estimate;
  int32_t method;
  uint64_t evaluations;
  double surface_parameter;
} TmChargeResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Canonical model `q = scale·(φ - origin)`.
 */
enum TmStatus tm_model_new_canonical(const double *origin, double scale, struct TmModel **out);

/**
 * Three-island circuit; `ejl`, `ejr` point to three values each.
 */
enum TmStatus tm_model_new_circuit(const double *ejl,
                                   const double *ejr,
                                   double e_c,
                                   double ng_l,
                                   double ng_r,
                                   struct TmModel **out);

/**
 * Triple-dot chain; `gamma` points to four values, `eps` to three.
 */
enum TmStatus tm_model_new_tripledot(double v_l,
                                     double v_r,
                                     const double *gamma,
                                     const double *eps,
                                     enum TmConvention convention,
                                     struct TmModel **out);

/**
 * Releases a handle; null is ignored.
 */
void tm_model_free(struct TmModel *m);

/**
 * Writes the 3×3 Hamiltonian at `pt` row-major into `out[9]`.
 */
enum TmStatus tm_model_hamiltonian(const struct TmModel *m,
                                   const double *pt,
                                   struct TmComplex *out);

/**
 * Ascending eigenvalues and eigenvectors of a row-major Hermitian `h[9]`.
 * `vectors[3k..3k+3]` is the eigenvector of `values[k]`.
 */
enum TmStatus tm_eigh3(const struct TmComplex *h, double *values, struct TmComplex *vectors);

/**
 * Curvature component `H_{a b c}` at `pt`.
 */
enum TmStatus tm_tensor_curvature(const struct TmModel *m,
                                  const double *pt,
                                  enum TmAxis a,
                                  enum TmAxis b,
                                  enum TmAxis c,
                                  double h_outer,
                                  double h_inner,
                                  double *out);

/**
 * Writes up to `capacity` degenerate points and their total into `*count`.
 * Returns `BufferTooSmall` when more points exist than fit; pass a null
 * `out` with zero capacity to query the count.
 */
enum TmStatus tm_locate_monopoles(const struct TmModel *m,
                                  struct TmDegeneratePoint *out,
                                  size_t capacity,
                                  size_t *count);

/**
 * Charge inside the hypercube of half-width `a` around `center`.
 */
enum TmStatus tm_dd_charge_cube(const struct TmModel *m,
                                const double *center,
                                double a,
                                size_t n,
                                enum TmCubeMethod method,
                                uint64_t seed,
                                struct TmChargeResult *out);

/**
 * Charge inside the 3-sphere of radius `r` around `center`, Monte-Carlo.
 */
enum TmStatus tm_dd_charge_sphere(const struct TmModel *m,
                                  const double *center,
                                  double r,
                                  size_t samples,
                                  uint64_t seed,
                                  struct TmChargeResult *out);

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`) and returns its full length in bytes.
 */
size_t tm_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TENSOR_MONOPOLE_H */
