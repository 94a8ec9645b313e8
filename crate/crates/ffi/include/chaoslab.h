#ifndef CHAOSLAB_H
#define CHAOSLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define CHAOSLAB_OK 0

/**
 * Null pointer, bad UTF-8 or a buffer of the wrong length.
 */
#define CHAOSLAB_ERR_ARGUMENT 1

/**
 * Domain, shape and precondition errors; the CLI exits with the same code.
 */
#define CHAOSLAB_ERR_PRECONDITION 2

#define CHAOSLAB_ERR_CAPACITY 3

#define CHAOSLAB_ERR_IO 4

/**
 * A Rust panic was caught at the boundary.
 */
#define CHAOSLAB_ERR_INTERNAL 5

/**
 * Opaque handle to a dense coefficient table.
 */
typedef struct ChaoslabKernel ChaoslabKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *chaoslab_last_error(void);

/**
 * Identifier of the random generator family, a static string.
 */
const char *chaoslab_generator_id(void);

/**
 * Kernel of `order` over a basis of `dim` from `len = dim^order` row-major
 * coefficients.
 *
 * # Safety
 * `coeffs` must point to `len` readable doubles and `out` must be writable.
 */
int chaoslab_kernel_new(size_t order,
                        size_t dim,
                        const double *coeffs,
                        size_t len,
                        struct ChaoslabKernel **out);

/**
 * Load a kernel from CSV, or the binary layout when the name ends in `.bin`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
int chaoslab_kernel_load(const char *path, struct ChaoslabKernel **out);

/**
 * # Safety
 * `k` must be a live handle and `path` a NUL-terminated string.
 */
int chaoslab_kernel_save(const struct ChaoslabKernel *k, const char *path);

/**
 * Release a handle; null is ignored.
 *
 * # Safety
 * `k` must be null or a handle not yet freed.
 */
void chaoslab_kernel_free(struct ChaoslabKernel *k);

/**
 * # Safety
 * `k` must be a live handle; `order` and `dim` writable.
 */
int chaoslab_kernel_shape(const struct ChaoslabKernel *k, size_t *order, size_t *dim);

/**
 * Copy the `dim^order` coefficients into `buf`, which must hold exactly `len`.
 *
 * # Safety
 * `k` must be a live handle and `buf` writable for `len` doubles.
 */
int chaoslab_kernel_coeffs(const struct ChaoslabKernel *k, double *buf, size_t len);

/**
 * # Safety
 * `k` must be a live handle and `out` writable.
 */
int chaoslab_kernel_symmetrize(const struct ChaoslabKernel *k, struct ChaoslabKernel **out);

/**
 * Contraction `f ⊗_r g` pairing the last `r` arguments of each kernel.
 *
 * # Safety
 * `f` and `g` must be live handles and `out` writable.
 */
int chaoslab_kernel_contract(const struct ChaoslabKernel *f,
                             const struct ChaoslabKernel *g,
                             size_t r,
                             struct ChaoslabKernel **out);

/**
 * Exact cumulant `κ_s(I_q(f))`.
 *
 * # Safety
 * `k` must be a live handle and `out` writable.
 */
int chaoslab_chaos_cumulant(const struct ChaoslabKernel *k, size_t s, double *out);

/**
 * Free moment `φ(F^m)` of the Wigner integral of a mirror-symmetric kernel.
 *
 * # Safety
 * `k` must be a live handle and `out` writable.
 */
int chaoslab_free_moment(const struct ChaoslabKernel *k, size_t m, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
int chaoslab_hermite_eval(size_t q, double x, double *out);

/**
 * Stein solution `f_x(u)` and its derivative.
 *
 * # Safety
 * `f` and `df` must be writable.
 */
int chaoslab_stein_eval(double x, double u, double *f, double *df);

/**
 * # Safety
 * `out` must be writable.
 */
int chaoslab_fbm_rho(double hurst, int64_t lag, double *out);

/**
 * Unit-variance fBm increments of replicate `replicate` for `seed`, written
 * to `buf[0..n]`.
 *
 * # Safety
 * `buf` must be writable for `n` doubles.
 */
int chaoslab_fbm_increments(double hurst, size_t n, uint64_t seed, uint64_t replicate, double *buf);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAOSLAB_H */
