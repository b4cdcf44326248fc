#ifndef JC_LATTICE_H
#define JC_LATTICE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum JcStatus {
  JC_STATUS_OK = 0,
  JC_STATUS_INVALID_ARGUMENT = 1,
  JC_STATUS_NULL_POINTER = 2,
  JC_STATUS_NUMERICAL = 3,
  JC_STATUS_INFEASIBLE = 4,
  JC_STATUS_BUFFER_TOO_SMALL = 5,
  JC_STATUS_PANIC = 6,
} JcStatus;

typedef enum JcChainId {
  JC_CHAIN_ID_C = 0,
  JC_CHAIN_ID_F = 1,
} JcChainId;

/*
 Opaque chain handle: parameters plus a cached eigendecomposition.
 */
typedef struct JcChain JcChain;

/*
 Observables of a single-site initial state at one time.
 */
typedef struct JcObservables {
  double p_g;
  double p_e;
  double p_rev;
  double mean_photon;
} JcObservables;

/*
 Fabrication constants, lengths in micrometres.
 */
typedef struct JcFabrication {
  double coupling_prefactor_per_um;
  double coupling_decay_per_um;
  double substrate_index;
  double wavelength_um;
} JcFabrication;

typedef struct JcDesignSummary {
  double omega_per_mm;
  double g_per_mm;
  double period_cm;
  double width_um;
} JcDesignSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on this thread.
 */
const char *jc_last_error_message(void);

/*
 Builds a truncated chain and its eigendecomposition.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum JcStatus jc_chain_new(double omega,
                           double omega0,
                           double g,
                           size_t n_sites,
                           enum JcChainId chain,
                           struct JcChain **out);

/*
 # Safety
 `handle` must come from [`jc_chain_new`] and not be used afterwards. Null is ignored.
 */
void jc_chain_free(struct JcChain *handle);

/*
 # Safety
 `handle` must be a live handle; `out` must be writable.
 */
enum JcStatus jc_chain_dim(const struct JcChain *handle, size_t *out);

/*
 Writes the eigenvalues in ascending order; `len` must be at least the chain size.

 # Safety
 `handle` must be live; `out` must point to `len` writable doubles.
 */
enum JcStatus jc_chain_eigenvalues(const struct JcChain *handle, double *out, size_t len);

/*
 Amplitudes at time `t` for the chain started on `site`.

 # Safety
 `handle` must be live; `re` and `im` must each point to `len` writable doubles.
 */
enum JcStatus jc_chain_evolve_site(const struct JcChain *handle,
                                   size_t site,
                                   double t,
                                   double *re,
                                   double *im,
                                   size_t len);

/*
 Populations, revival probability and mean photon number at time `t`.

 # Safety
 `handle` must be live; `out` must be writable.
 */
enum JcStatus jc_chain_observables(const struct JcChain *handle,
                                   size_t site,
                                   double t,
                                   struct JcObservables *out);

/*
 Converged truncation for chain F started on site 0 (see the library's
 doubling search).

 # Safety
 `out` must be writable.
 */
enum JcStatus jc_choose_truncation(double g_over_omega,
                                   double omega0_over_omega,
                                   double horizon,
                                   double tail_tol,
                                   size_t *out);

double jc_dsc_revival_probability(double t, double g_over_omega, double omega);

double jc_dsc_mean_photon(double t, double g_over_omega, double omega);

double jc_dsc_photon_distribution(size_t n, double t, double g_over_omega, double omega);

/*
 Defaults: A = 24.6 /mm, gamma = 0.466 /um, n_s = 1.45, lambda = 633 nm.
 */
struct JcFabrication jc_fabrication_default(void);

/*
 Spacings (micrometres) of an `n_guides` array realizing `g/omega` with the
 given bend radius and pitch. `spacings_um` receives `n_guides - 1` values.

 # Safety
 `fab` and `summary` must be valid; `spacings_um` must point to `len` writable doubles.
 */
enum JcStatus jc_design_array(double g_over_omega,
                              size_t n_guides,
                              const struct JcFabrication *fab,
                              double bend_radius_um,
                              double pitch_um,
                              double *spacings_um,
                              size_t len,
                              struct JcDesignSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JC_LATTICE_H */
