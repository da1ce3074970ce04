#ifndef NLS_CANON_H
#define NLS_CANON_H

#include <stddef.h>
#include <stdint.h>

typedef enum NlsStatus {
  NLS_STATUS_OK = 0,
  NLS_STATUS_NULL_POINTER,
  NLS_STATUS_INVALID_PARAMETER,
  NLS_STATUS_DOMAIN,
  NLS_STATUS_NON_FINITE_COEFFICIENT,
  NLS_STATUS_SINGULAR_COEFFICIENT,
  NLS_STATUS_INTEGRATION_FAILURE,
  NLS_STATUS_QUADRATURE_FAILURE,
  NLS_STATUS_SINGULAR_QUADRATURE,
  NLS_STATUS_FOCAL_POINT,
  NLS_STATUS_FOCAL_TIME,
  NLS_STATUS_NORMALIZATION,
  NLS_STATUS_OUT_OF_CHART,
  NLS_STATUS_DEGENERATE_KERNEL,
  NLS_STATUS_NON_FINITE_FIELD,
  NLS_STATUS_OUT_OF_DOMAIN,
  NLS_STATUS_RESOLUTION,
  NLS_STATUS_DEGENERATE_DATA,
  NLS_STATUS_UNSUPPORTED,
  NLS_STATUS_DIVERGENCE,
  NLS_STATUS_SHAPE_MISMATCH,
  NLS_STATUS_OTHER,
  NLS_STATUS_PANIC,
} NlsStatus;

typedef enum NlsPreset {
  NLS_PRESET_FREE,
  NLS_PRESET_HARMONIC,
  NLS_PRESET_EXPONENTIAL,
  NLS_PRESET_PLASMA,
} NlsPreset;

typedef enum NlsNormalization {
  NLS_NORMALIZATION_LEMMA1,
  NLS_NORMALIZATION_CIVP,
} NlsNormalization;

typedef enum NlsFamily {
  NLS_FAMILY_BRIGHT,
  NLS_FAMILY_DARK,
  NLS_FAMILY_CN,
  NLS_FAMILY_DN,
  NLS_FAMILY_ONE_SOLITON,
  NLS_FAMILY_TWO_SOLITON,
  NLS_FAMILY_BREATHER,
} NlsFamily;

typedef struct NlsBasis NlsBasis;

typedef struct NlsCoefficients NlsCoefficients;

typedef struct NlsFrame NlsFrame;

typedef struct NlsSolution NlsSolution;

/**
 * Standard solutions of the characteristic equation at one time.
 */
typedef struct NlsBasisValues {
  double mu0;
  double mu0_prime;
  double mu1;
  double mu1_prime;
} NlsBasisValues;

typedef struct NlsComplex {
  double re;
  double im;
} NlsComplex;

/**
 * Riccati state `mu, alpha, beta, gamma, delta, epsilon, kappa`.
 */
typedef struct NlsRiccatiState {
  double mu;
  double alpha;
  double beta;
  double gamma;
  double delta;
  double epsilon;
  double kappa;
} NlsRiccatiState;

/**
 * Traveling-wave parameters; ignored by the soliton families.
 */
typedef struct NlsWaveParams {
  double y;
  double g0;
  double h0;
  double c0;
  double phi;
} NlsWaveParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nls_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *nls_last_error_message(void);

/**
 * Coefficients of a preset family with nonlinearity `h0`. `param` is ω for the
 * harmonic preset and k for the exponential and plasma presets.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum NlsStatus nls_coeffs_preset(enum NlsPreset preset,
                                 double param,
                                 double h0,
                                 struct NlsCoefficients **out);

/**
 * Coefficients of the linear-potential (Airy soliton) equation.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum NlsStatus nls_coeffs_example3(double alpha0,
                                   double beta0,
                                   double gamma0,
                                   double g0,
                                   double h0,
                                   struct NlsCoefficients **out);

/**
 * Coefficients from a JSON document (NUL-terminated UTF-8).
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` writable.
 */
enum NlsStatus nls_coeffs_from_json(const char *json, struct NlsCoefficients **out);

/**
 * # Safety
 * `p` must be NULL or a handle from `nls_coeffs_*` not yet freed.
 */
void nls_coeffs_free(struct NlsCoefficients *p);

/**
 * Characteristic basis: closed form when available, else integrated on `[0, t_end]`.
 *
 * # Safety
 * `coeffs` must be a live handle and `out` writable.
 */
enum NlsStatus nls_basis_new(const struct NlsCoefficients *coeffs,
                             double t_end,
                             struct NlsBasis **out);

/**
 * # Safety
 * `basis` must be a live handle and `out` writable.
 */
enum NlsStatus nls_basis_eval(const struct NlsBasis *basis, double t, struct NlsBasisValues *out);

/**
 * # Safety
 * `p` must be NULL or a handle from [`nls_basis_new`] not yet freed.
 */
void nls_basis_free(struct NlsBasis *p);

/**
 * Green's function `G(x, y, t)` of the linear equation.
 *
 * # Safety
 * `basis` must be a live handle and `out` writable.
 */
enum NlsStatus nls_green(const struct NlsBasis *basis,
                         double x,
                         double y,
                         double t,
                         struct NlsComplex *out);

/**
 * Transformation frame on `[0, t_end]` starting from `init` (NULL for the identity).
 *
 * # Safety
 * `coeffs` must be a live handle, `init` NULL or valid, `out` writable.
 */
enum NlsStatus nls_frame_new(const struct NlsCoefficients *coeffs,
                             const struct NlsRiccatiState *init,
                             double t_end,
                             enum NlsNormalization normalization,
                             struct NlsFrame **out);

/**
 * # Safety
 * `frame` must be a live handle and `out` writable.
 */
enum NlsStatus nls_frame_state(const struct NlsFrame *frame, double t, struct NlsRiccatiState *out);

/**
 * Nonlinear coupling `h(t)` of the equation the lifted fields solve.
 *
 * # Safety
 * `frame` must be a live handle and `out` writable.
 */
enum NlsStatus nls_frame_coupling(const struct NlsFrame *frame, double t, double *out);

/**
 * # Safety
 * `p` must be NULL or a handle from [`nls_frame_new`] not yet freed.
 */
void nls_frame_free(struct NlsFrame *p);

/**
 * Exact solution of a family; `params` may be NULL for the defaults.
 *
 * # Safety
 * `params` must be NULL or valid and `out` writable.
 */
enum NlsStatus nls_solution_new(enum NlsFamily family,
                                const struct NlsWaveParams *params,
                                struct NlsSolution **out);

/**
 * Lifts `solution` through `frame`; the result is a new handle.
 *
 * # Safety
 * `solution` and `frame` must be live handles and `out` writable.
 */
enum NlsStatus nls_solution_lift(const struct NlsSolution *solution,
                                 const struct NlsFrame *frame,
                                 struct NlsSolution **out);

/**
 * # Safety
 * `solution` must be a live handle and `out` writable.
 */
enum NlsStatus nls_solution_eval(const struct NlsSolution *solution,
                                 double x,
                                 double t,
                                 struct NlsComplex *out);

/**
 * # Safety
 * `p` must be NULL or a handle from `nls_solution_*` not yet freed.
 */
void nls_solution_free(struct NlsSolution *p);

/**
 * Reflectionless reconstruction from `n` eigenvalues and norming constants given at `t0`.
 *
 * # Safety
 * `eigenvalues` and `norming` must point to `n` readable values; `out` writable.
 */
enum NlsStatus nls_glm(const struct NlsComplex *eigenvalues,
                       const struct NlsComplex *norming,
                       uintptr_t n,
                       double t0,
                       double x,
                       double t,
                       struct NlsComplex *out);

/**
 * Nonlinear Airy profile `u(ζ)` for `u ~ k0 Ai(ζ)`, sampled at `n` points not
 * below `zeta_end`.
 *
 * # Safety
 * `zetas` must hold `n` readable values and `out` room for `n` values.
 */
enum NlsStatus nls_painleve(double k0,
                            double zeta_end,
                            const double *zetas,
                            uintptr_t n,
                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLS_CANON_H */
