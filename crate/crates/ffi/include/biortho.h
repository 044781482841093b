#ifndef BIORTHO_H
#define BIORTHO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum {
  BIORTHO_STATUS_OK = 0,
  BIORTHO_STATUS_NULL_POINTER = 1,
  BIORTHO_STATUS_DOMAIN = 2,
  BIORTHO_STATUS_ACCURACY = 3,
  BIORTHO_STATUS_SINGULAR = 4,
  BIORTHO_STATUS_IO = 5,
  BIORTHO_STATUS_FORMAT = 6,
  BIORTHO_STATUS_INVALID_ARGUMENT = 7,
  BIORTHO_STATUS_PANIC = 8,
} BiorthoStatus;

typedef enum {
  BIORTHO_FAMILY_JACOBI = 0,
  BIORTHO_FAMILY_LAGUERRE = 1,
  BIORTHO_FAMILY_HERMITE = 2,
} BiorthoFamily;

/*
 A finite-N correlation kernel.
 */
typedef struct BiorthoKernel BiorthoKernel;

/*
 Draws from a Metropolis run, configurations sorted ascending.
 */
typedef struct BiorthoSampleBatch BiorthoSampleBatch;

/*
 Markov chain settings; see `biortho_chain_config_default`.
 */
typedef struct {
  uint64_t steps;
  uint64_t burn_in;
  uint64_t thin;
  double proposal_scale;
  uint64_t seed;
  uint32_t chains;
} BiorthoChainConfig;

/*
 Copies the calling thread's last error message (NUL-terminated, truncated to
 `len` bytes) into `buf` and returns the full message length without the NUL.
 Pass a null `buf` to query the length.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
size_t biortho_last_error_message(char *buf, size_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *biortho_version(void);

/*
 Creates the finite kernel K_N for the given ensemble.

 # Safety
 `out` must be a valid pointer; on success it receives a handle to release
 with `biortho_kernel_free`.
 */
BiorthoStatus biortho_kernel_new(BiorthoFamily family,
                                 double alpha,
                                 double theta,
                                 size_t n,
                                 BiorthoKernel **out);

/*
 # Safety
 `kernel` must be null or a handle from `biortho_kernel_new` not yet freed.
 */
void biortho_kernel_free(BiorthoKernel *kernel);

/*
 K_N(x, y).

 # Safety
 `kernel` must be a live handle and `out` a valid pointer.
 */
BiorthoStatus biortho_kernel_eval(const BiorthoKernel *kernel, double x, double y, double *out);

/*
 The kernel at its scaling-limit coordinates.

 # Safety
 `kernel` must be a live handle and `out` a valid pointer.
 */
BiorthoStatus biortho_kernel_eval_scaled(const BiorthoKernel *kernel,
                                         double x,
                                         double y,
                                         double *out);

/*
 ∏ω(x_i) det[K_N(x_i, x_j)] for `len` points.

 # Safety
 `kernel` must be a live handle, `points` must hold `len` doubles and `out`
 must be a valid pointer.
 */
BiorthoStatus biortho_kernel_correlation(const BiorthoKernel *kernel,
                                         const double *points,
                                         size_t len,
                                         double *out);

/*
 The hard-edge limit kernel at x, y >= 0.

 # Safety
 `out` must be a valid pointer.
 */
BiorthoStatus biortho_limit_kernel(double alpha, double theta, double x, double y, double *out);

/*
 The Hermite-type limit kernel on the real line.

 # Safety
 `out` must be a valid pointer.
 */
BiorthoStatus biortho_limit_kernel_hermite(double alpha,
                                           double theta,
                                           double x,
                                           double y,
                                           double *out);

/*
 Wright's function J_{a,b}(x).

 # Safety
 `out` must be a valid pointer.
 */
BiorthoStatus biortho_wright_bessel(double a, double b, double x, double *out);

BiorthoChainConfig biortho_chain_config_default(void);

/*
 Runs the Metropolis sampler.

 # Safety
 `config` and `out` must be valid pointers; on success `out` receives a
 handle to release with `biortho_sample_free`.
 */
BiorthoStatus biortho_sample(BiorthoFamily family,
                             double alpha,
                             double theta,
                             size_t n,
                             const BiorthoChainConfig *config,
                             BiorthoSampleBatch **out);

/*
 # Safety
 `batch` must be null or a handle from `biortho_sample` not yet freed.
 */
void biortho_sample_free(BiorthoSampleBatch *batch);

/*
 Number of kept configurations, points per configuration and the
 post-burn-in acceptance rate. Any output pointer may be null.

 # Safety
 `batch` must be a live handle; non-null outputs must be valid.
 */
BiorthoStatus biortho_sample_info(const BiorthoSampleBatch *batch,
                                  size_t *count,
                                  size_t *n_points,
                                  double *acceptance_rate);

/*
 Copies all coordinates (count × n_points doubles, row-major) into `buf`.

 # Safety
 `batch` must be a live handle and `buf` must hold `len` doubles.
 */
BiorthoStatus biortho_sample_positions(const BiorthoSampleBatch *batch, double *buf, size_t len);

/*
 Runs the named verification suite; `passed` receives the verdict.

 # Safety
 `name` must be a NUL-terminated string and `passed` a valid pointer.
 */
BiorthoStatus biortho_verify_suite(const char *name, bool *passed);

#endif  /* BIORTHO_H */
