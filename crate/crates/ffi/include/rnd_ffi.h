#ifndef RND_FFI_H
#define RND_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Status codes returned by every fallible function.
typedef enum RndStatus {
  RND_STATUS_OK = 0,
  RND_STATUS_NULL_POINTER = 1,
  RND_STATUS_INVALID_ARGUMENT = 2,
  RND_STATUS_NOT_ABSOLUTELY_CONTINUOUS = 3,
  RND_STATUS_DOMAIN = 4,
  RND_STATUS_PARSE = 5,
  RND_STATUS_BUFFER_TOO_SMALL = 6,
  RND_STATUS_PANIC = 7,
} RndStatus;

// A row-stochastic kernel from `0..nx` to `0..ny`.
typedef struct RndKernel RndKernel;

// A finite signed measure on the points `0..n`.
typedef struct RndMeasure RndMeasure;

// Last error on this thread, or NULL. The pointer stays valid until the
// next failing call on the same thread.
const char *rnd_last_error_message(void);

// Signed measure with `n` point weights.
//
// # Safety
// `weights` must point to `n` doubles; `out` must be writable.
enum RndStatus rnd_measure_new(const double *weights, size_t n, struct RndMeasure **out);

// Probability measure: weights must be nonnegative and sum to one within
// `1e-9`; they are renormalized.
//
// # Safety
// As for [`rnd_measure_new`].
enum RndStatus rnd_probability_new(const double *weights, size_t n, struct RndMeasure **out);

// # Safety
// `m` must come from a `*_new` call and not be freed twice. NULL is ignored.
void rnd_measure_free(struct RndMeasure *m);

// Number of points, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t rnd_measure_len(const struct RndMeasure *m);

// # Safety
// `m` must be a live handle; `out` must be writable.
enum RndStatus rnd_measure_total_mass(const struct RndMeasure *m, double *out);

// Whether every point `q` leaves uncharged is uncharged by `p`.
//
// # Safety
// `p`, `q` must be live handles; `out` must be writable.
enum RndStatus rnd_measure_is_absolutely_continuous(const struct RndMeasure *p,
                                                    const struct RndMeasure *q,
                                                    bool *out);

// Writes `dP/dQ` into `out[0..len]`, with 0 at points `Q` does not charge.
//
// # Safety
// `p`, `q` must be live handles; `out` must have room for `len` doubles.
enum RndStatus rnd_derivative(const struct RndMeasure *p,
                              const struct RndMeasure *q,
                              double *out,
                              size_t len);

// `D(P || Q)` in nats for two probability measures.
//
// # Safety
// `p`, `q` must be live handles; `out` must be writable.
enum RndStatus rnd_kl_divergence(const struct RndMeasure *p,
                                 const struct RndMeasure *q,
                                 double *out);

// Kernel from a row-major `nx` by `ny` matrix whose rows sum to one.
//
// # Safety
// `rows` must point to `nx * ny` doubles; `out` must be writable.
enum RndStatus rnd_kernel_new(const double *rows, size_t nx, size_t ny, struct RndKernel **out);

// # Safety
// `k` must come from [`rnd_kernel_new`] and not be freed twice. NULL is ignored.
void rnd_kernel_free(struct RndKernel *k);

// Mutual information in nats.
//
// # Safety
// `k`, `px` must be live handles; `out` must be writable.
enum RndStatus rnd_mutual_information(const struct RndKernel *k,
                                      const struct RndMeasure *px,
                                      double *out);

// Lautum information in nats.
//
// # Safety
// `k`, `px` must be live handles; `out` must be writable.
enum RndStatus rnd_lautum_information(const struct RndKernel *k,
                                      const struct RndMeasure *px,
                                      double *out);

// Right-hand side of the `I + L` identity for reference measure `q`.
//
// # Safety
// `k`, `px`, `q` must be live handles; `out` must be writable.
enum RndStatus rnd_identity_rhs(const struct RndKernel *k,
                                const struct RndMeasure *px,
                                const struct RndMeasure *q,
                                double *out);

// Checks `P(A) = integral over A of dP/dQ dQ` on every subset; writes the
// worst relative deviation and whether it is within `1e-12`.
//
// # Safety
// `p`, `q` must be live handles; `max_deviation` and `pass` must be writable.
enum RndStatus rnd_check_rn_construction(const struct RndMeasure *p,
                                         const struct RndMeasure *q,
                                         double *max_deviation,
                                         bool *pass);

// Runs the generated-instance suite and returns the JSON report in
// `*report`, to be released with [`rnd_string_free`]. `theorem` names one
// theorem id, or NULL for all. `*all_pass` tells whether every check passed.
//
// # Safety
// `theorem` must be NULL or a NUL-terminated string; `report` and
// `all_pass` must be writable.
enum RndStatus rnd_verify(const char *theorem,
                          uint64_t seed,
                          size_t trials,
                          char **report,
                          bool *all_pass);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void rnd_string_free(char *s);

#endif  /* RND_FFI_H */
