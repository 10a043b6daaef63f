#ifndef ULTRASLOW_H
#define ULTRASLOW_H

#include <stddef.h>

// Result codes shared by every entry point.
typedef enum us_status {
  US_STATUS_OK = 0,
  US_STATUS_NULL_POINTER = 1,
  US_STATUS_DOMAIN = 2,
  US_STATUS_INVARIANT = 3,
  US_STATUS_NUMERIC = 4,
  US_STATUS_DIMENSION = 5,
  US_STATUS_CONFIG = 6,
  US_STATUS_IO = 7,
  US_STATUS_PANIC = 8,
} us_status;

// Opaque eigenbasis handle.
typedef struct us_basis us_basis;

// Opaque order-density handle.
typedef struct us_weight us_weight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null after a
// success. The pointer stays valid until the next call on this thread.
const char *us_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *us_version(void);

// μ ≡ value on [0, 1], with the concentration pair (alpha0, delta).
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum us_status us_weight_constant(double value,
                                  double alpha0,
                                  double delta,
                                  struct us_weight **out);

// μ = 1/h on [alpha0 − h, alpha0], zero elsewhere.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum us_status us_weight_box(double alpha0, double h, struct us_weight **out);

// Piecewise-constant μ: `values[i]` on `[breaks[i], breaks[i + 1])`.
// `breaks` holds `pieces + 1` points running from 0 to 1.
//
// # Safety
// `breaks` and `values` must point to `pieces + 1` and `pieces` doubles;
// `out` must be writable.
enum us_status us_weight_piecewise_constant(const double *breaks,
                                            const double *values,
                                            size_t pieces,
                                            double alpha0,
                                            double delta,
                                            struct us_weight **out);

// Releases a weight handle; null is ignored.
//
// # Safety
// `w` must come from a `us_weight_*` constructor and not be used afterwards.
void us_weight_free(struct us_weight *w);

// μ(alpha).
//
// # Safety
// `w` must be a live handle and `out` writable.
enum us_status us_weight_density(const struct us_weight *w, double alpha, double *out);

// s·w(s) = ∫ s^α μ(α) dα at s = re + i·im, off the closed negative axis.
//
// # Safety
// `w` must be a live handle; `out_re` and `out_im` writable.
enum us_status us_weight_symbol(const struct us_weight *w,
                                double re,
                                double im,
                                double *out_re,
                                double *out_im);

// Exact Dirichlet sine basis of −u'' on (0, length).
//
// # Safety
// `out` must be writable.
enum us_status us_basis_dirichlet(double length, size_t modes, struct us_basis **out);

// Finite-difference basis of −∂(c_a·a ∂u) + q u with polynomial a and q
// (coefficients in increasing degree).
//
// # Safety
// `a` and `q` must point to `a_len` and `q_len` doubles; `out` writable.
enum us_status us_basis_fd(const double *a,
                           size_t a_len,
                           const double *q,
                           size_t q_len,
                           double c_a,
                           double length,
                           size_t points,
                           size_t modes,
                           struct us_basis **out);

// Releases a basis handle; null is ignored.
//
// # Safety
// `b` must come from a `us_basis_*` constructor and not be used afterwards.
void us_basis_free(struct us_basis *b);

// Number of retained modes, or 0 for a null handle.
//
// # Safety
// `b` must be null or a live handle.
size_t us_basis_modes(const struct us_basis *b);

// Copies the eigenvalues into `out`, which must hold `len` ≥ modes doubles.
//
// # Safety
// `b` must be a live handle and `out` must hold `len` doubles.
enum us_status us_basis_eigenvalues(const struct us_basis *b, double *out, size_t len);

// Relaxation kernel for eigenvalue `lambda` at time `t > 0`; equals 1 at t = 0+.
//
// # Safety
// `w` must be a live handle and `out` writable.
enum us_status us_relaxation(const struct us_weight *w, double lambda, double t, double *out);

// Source response kernel for eigenvalue `lambda` at time `t > 0`.
//
// # Safety
// `w` must be a live handle and `out` writable.
enum us_status us_response(const struct us_weight *w, double lambda, double t, double *out);

// Two-parameter Mittag-Leffler function for alpha in (0, 1] and z ≤ 0.
//
// # Safety
// `out` must be writable.
enum us_status us_mittag_leffler(double alpha, double beta, double z, double *out);

// Source-free solve. `initial` holds the basis coefficients of u₀ (length
// equal to the mode count); `out` receives `times_len × modes` coefficients,
// row by row in the order of `times`.
//
// # Safety
// All pointers must be valid for the stated lengths.
enum us_status us_solve_homogeneous(const struct us_weight *w,
                                    const struct us_basis *b,
                                    const double *initial,
                                    size_t initial_len,
                                    const double *times,
                                    size_t times_len,
                                    double *out,
                                    size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ULTRASLOW_H */
