#ifndef DIMERFIT_H
#define DIMERFIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DfStatus {
  DF_STATUS_OK = 0,
  // Null pointer or inconsistent length.
  DF_STATUS_INVALID_ARGUMENT = 1,
  // Parameter, grid or basis rejected by validation.
  DF_STATUS_INVALID_PARAMETER = 2,
  // Propagation, factorization or hyperparameter fit failed.
  DF_STATUS_NUMERICAL = 3,
  // Internal error; the library state is unaffected.
  DF_STATUS_PANIC = 4,
} DfStatus;

// Fitted surrogate model.
typedef struct DfGpr DfGpr;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call into the library on this thread.
const char *df_last_error(void);

// Library version as a static NUL-terminated string.
const char *df_version(void);

// Area-normalized monomer absorption spectrum on `n_points` equally spaced
// frequencies from `nu_start` to `nu_end` (cm⁻¹).
//
// `monomer` holds ε_e, ω_vib, S, γ, σ_m. `n_max` = 0 selects the default
// truncation. `coverage` may be null.
//
// # Safety
// `monomer` must point to 5 doubles and `out_amp` to `n_points` doubles.
enum DfStatus df_simulate_monomer(const double *monomer,
                                  double nu_start,
                                  double nu_end,
                                  size_t n_points,
                                  size_t n_max,
                                  double *out_amp,
                                  double *coverage);

// Dimer spectrum; as [`df_simulate_monomer`] with `dimer` holding V, δ, α (degrees), σ_d.
//
// # Safety
// `monomer` must point to 5 doubles, `dimer` to 4 and `out_amp` to `n_points`.
enum DfStatus df_simulate_dimer(const double *monomer,
                                const double *dimer,
                                double nu_start,
                                double nu_end,
                                size_t n_points,
                                size_t n_max,
                                double *out_amp,
                                double *coverage);

// L1 distance between two spectra sampled on the same grid. Both must be
// area-normalized; the result lies in [0, 2].
//
// # Safety
// `a` and `b` must point to `n_points` doubles, `out` to one.
enum DfStatus df_spectral_cost(double nu_start,
                               double nu_end,
                               size_t n_points,
                               const double *a,
                               const double *b,
                               double *out);

// Fit a surrogate to `n` points of dimension `dim` inside the box
// [`lower`, `upper`]. `x` is row-major, `n`×`dim`. On success `*out` owns a
// model that must be released with [`df_gpr_free`].
//
// # Safety
// `lower`/`upper` must hold `dim` doubles, `x` `n*dim`, `y` `n`; `out` non-null.
enum DfStatus df_gpr_fit(size_t dim,
                         const double *lower,
                         const double *upper,
                         size_t n,
                         const double *x,
                         const double *y,
                         struct DfGpr **out);

// Posterior mean and standard deviation at `x` (`dim` doubles). Either output may be null.
//
// # Safety
// `gpr` must come from [`df_gpr_fit`] and not be freed.
enum DfStatus df_gpr_predict(const struct DfGpr *gpr, const double *x, double *mean, double *std);

// Fitted length scales in unit-box coordinates; `out` holds `dim` doubles.
//
// # Safety
// `gpr` must be a live handle.
enum DfStatus df_gpr_length_scales(const struct DfGpr *gpr, double *out);

// Release a model. Null is ignored.
//
// # Safety
// `gpr` must come from [`df_gpr_fit`] and not be used afterwards.
void df_gpr_free(struct DfGpr *gpr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIMERFIT_H */
