#ifndef ROTINV_H
#define ROTINV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum RotinvStatus {
  ROTINV_STATUS_OK = 0,
  ROTINV_STATUS_DOMAIN = 1,
  ROTINV_STATUS_INVALID_ARGUMENT = 2,
  ROTINV_STATUS_QUADRATURE = 3,
  /*
   Refinement budget exhausted; the out value holds the best estimate.
   */
  ROTINV_STATUS_NON_CONVERGENCE = 4,
  ROTINV_STATUS_PARSE = 5,
  ROTINV_STATUS_NULL_POINTER = 6,
  ROTINV_STATUS_PANIC = 7,
} RotinvStatus;

/*
 Opaque dual-polarization field.
 */
typedef struct RotinvField RotinvField;

/*
 Opaque sphere set.
 */
typedef struct RotinvSphereSet RotinvSphereSet;

typedef struct RotinvQuadratureConfig {
  double rel_tol;
  double abs_tol;
  double peak_halfwidth;
  uint32_t base_panels;
  uint32_t max_refinements;
} RotinvQuadratureConfig;

/*
 Channel `Y = X + N` with `N ~ N(0, sigma^2 I_dims)` and SNR
 `A = E|X|^2 / (2 sigma^2)`.
 */
typedef struct RotinvChannel {
  uint32_t dims;
  double sigma;
  double snr;
} RotinvChannel;

typedef struct RotinvMiResult {
  double bits_per_nd_use;
  double error_estimate;
  uint64_t evaluations;
} RotinvMiResult;

typedef struct RotinvMcEstimate {
  double estimate;
  /*
   Standard error of `estimate`.
   */
  double std_error;
  uint64_t samples;
  uint64_t seed;
} RotinvMcEstimate;

typedef struct RotinvFiberParams {
  /*
   Group-velocity dispersion, s^2/m.
   */
  double beta2;
  /*
   Nonlinear coefficient, 1/(W m).
   */
  double gamma;
  /*
   Fiber length, m.
   */
  double length;
  uint32_t steps;
  /*
   Noise power spectral density per polarization; 0 disables noise.
   */
  double noise_psd;
} RotinvFiberParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Static description of a status code; unknown codes get a generic text.
 */
const char *rotinv_status_string(int32_t status);

/*
 Message of the last failure on this thread, or NULL. Valid until the
 next failing call on the same thread.
 */
const char *rotinv_last_error(void);

struct RotinvQuadratureConfig rotinv_quadrature_config_default(void);

/*
 `(N/2) log2(1 + 2A/N)`.

 # Safety
 `out` must be valid for writes.
 */
enum RotinvStatus rotinv_awgn_capacity(uint32_t dims, double snr, double *out);

/*
 `ln(I_nu(x) e^{-x})`.

 # Safety
 `out` must be valid for writes.
 */
enum RotinvStatus rotinv_log_bessel_i_scaled(double nu, double x, double *out);

/*
 Log density of the normalized output radius given normalized input
 radius `s_tilde`.

 # Safety
 `out` must be valid for writes.
 */
enum RotinvStatus rotinv_log_chi_kernel(double r_tilde, double s_tilde, uint32_t dims, double *out);

/*
 # Safety
 `radii` and `probs` must point to `len` doubles; `out` valid for writes.
 */
enum RotinvStatus rotinv_sphere_set_new(const double *radii,
                                        const double *probs,
                                        uintptr_t len,
                                        struct RotinvSphereSet **out);

/*
 Equiprobable, uniformly spaced spheres meeting the channel's SNR.

 # Safety
 `channel` must be valid for reads and `out` for writes.
 */
enum RotinvStatus rotinv_sphere_set_uniform(uint32_t rings,
                                            const struct RotinvChannel *channel_params,
                                            struct RotinvSphereSet **out);

/*
 # Safety
 `set` must come from a `rotinv_sphere_set_*` constructor and not be
 used afterwards. NULL is ignored.
 */
void rotinv_sphere_set_free(struct RotinvSphereSet *set);

/*
 Number of spheres, 0 for NULL.

 # Safety
 `set` must be a live handle or NULL.
 */
uintptr_t rotinv_sphere_set_len(const struct RotinvSphereSet *set);

/*
 Copies radii and probabilities into caller buffers of `len` entries.

 # Safety
 `set` must be live; `radii` and `probs` valid for `len` writes.
 */
enum RotinvStatus rotinv_sphere_set_copy(const struct RotinvSphereSet *set,
                                         double *radii,
                                         double *probs,
                                         uintptr_t len);

/*
 `E|X|^2 = sum p_k r_k^2`.

 # Safety
 `set` must be live and `out` valid for writes.
 */
enum RotinvStatus rotinv_sphere_set_average_power(const struct RotinvSphereSet *set, double *out);

/*
 Mutual information of a multisphere input by quadrature. `config` may
 be NULL for defaults. On `NON_CONVERGENCE`, `out` holds the best
 estimate.

 # Safety
 Pointers must be valid; `set` must be live.
 */
enum RotinvStatus rotinv_mi_multisphere(const struct RotinvSphereSet *set,
                                        const struct RotinvChannel *channel_params,
                                        const struct RotinvQuadratureConfig *config,
                                        struct RotinvMiResult *out);

/*
 Monte Carlo MI from full N-D vector samples.

 # Safety
 Pointers must be valid; `set` must be live.
 */
enum RotinvStatus rotinv_mc_mi_vector(const struct RotinvSphereSet *set,
                                      const struct RotinvChannel *channel_params,
                                      uint64_t samples,
                                      uint64_t seed,
                                      struct RotinvMcEstimate *out);

/*
 Monte Carlo MI from output radii only.

 # Safety
 Pointers must be valid; `set` must be live.
 */
enum RotinvStatus rotinv_mc_mi_radial(const struct RotinvSphereSet *set,
                                      const struct RotinvChannel *channel_params,
                                      uint64_t samples,
                                      uint64_t seed,
                                      struct RotinvMcEstimate *out);

/*
 Field from `samples` interleaved complex values per polarization.

 # Safety
 `ex` and `ey` must point to `2 * samples` doubles; `out` valid for writes.
 */
enum RotinvStatus rotinv_field_new(const double *ex,
                                   const double *ey,
                                   uintptr_t samples,
                                   double dt,
                                   struct RotinvField **out);

/*
 # Safety
 `field` must come from this library and not be used afterwards. NULL
 is ignored.
 */
void rotinv_field_free(struct RotinvField *field);

/*
 Samples per polarization, 0 for NULL.

 # Safety
 `field` must be a live handle or NULL.
 */
uintptr_t rotinv_field_len(const struct RotinvField *field);

/*
 `dt * sum(|Ex|^2 + |Ey|^2)`.

 # Safety
 `field` must be live and `out` valid for writes.
 */
enum RotinvStatus rotinv_field_energy(const struct RotinvField *field, double *out);

/*
 Copies both polarizations into interleaved buffers of `2 * samples`
 doubles.

 # Safety
 `field` must be live; `ex` and `ey` valid for `2 * samples` writes.
 */
enum RotinvStatus rotinv_field_copy(const struct RotinvField *field,
                                    double *ex,
                                    double *ey,
                                    uintptr_t samples);

/*
 Split-step propagation; returns a new field. `seed` drives the noise.

 # Safety
 Pointers must be valid; `field` must be live.
 */
enum RotinvStatus rotinv_field_propagate(const struct RotinvField *field,
                                         const struct RotinvFiberParams *fiber,
                                         uint64_t seed,
                                         struct RotinvField **out);

/*
 Applies the 2x2 unitary `u` (row-major, interleaved complex, 8
 doubles) to every sample; returns a new field.

 # Safety
 `field` must be live, `u` must point to 8 doubles, `out` valid for writes.
 */
enum RotinvStatus rotinv_field_apply_unitary(const struct RotinvField *field,
                                             const double *u,
                                             struct RotinvField **out);

/*
 Haar-distributed 2x2 unitary, row-major interleaved complex.

 # Safety
 `out` must be valid for 8 writes.
 */
enum RotinvStatus rotinv_random_haar_unitary(uint64_t seed, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROTINV_H */
