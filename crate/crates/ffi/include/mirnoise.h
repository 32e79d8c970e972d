#ifndef MIRNOISE_H
#define MIRNOISE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MnStatus {
  MN_STATUS_OK = 0,
  MN_STATUS_INVALID_ARGUMENT = 1,
  MN_STATUS_INFEASIBLE_GEOMETRY = 2,
  /**
   * The result was written but its tail bound exceeds the tolerance.
   */
  MN_STATUS_BUDGET_EXCEEDED = 3,
  MN_STATUS_NULL_POINTER = 4,
  MN_STATUS_INTERNAL = 5,
} MnStatus;

/**
 * Opaque mirror geometry.
 */
typedef struct MnGeometry MnGeometry;

typedef struct MnChiResult {
  double re;
  double im;
  uint64_t modes_used;
  double tail_bound;
  /**
   * 1 when the tail bound is strict, 0 when it is an estimate.
   */
  int32_t tail_is_rigorous;
} MnChiResult;

typedef struct MnSpectrumPoint {
  double omega;
  double chi_re;
  double chi_im;
  double force;
  double displacement;
  double displacement_approx;
  double tail_bound;
} MnSpectrumPoint;

/**
 * Static description of a status code. Never null.
 */
const char *mn_status_message(enum MnStatus status);

/**
 * Solves the sharp-edged geometry. Returns null on failure, with the
 * reason in `*status` when `status` is non-null.
 *
 * # Safety
 * `status` must be null or point to writable memory for one `MnStatus`.
 */
struct MnGeometry *mn_geometry_solve(double mass,
                                     double thickness,
                                     double density,
                                     double sound_speed,
                                     double loss_angle,
                                     enum MnStatus *status);

/**
 * Releases a geometry. Null is ignored.
 *
 * # Safety
 * `geometry` must come from `mn_geometry_solve` and not be used afterwards.
 */
void mn_geometry_free(struct MnGeometry *geometry);

/**
 * Curvature radius of the convex face (m). NaN for a null handle.
 *
 * # Safety
 * `geometry` must be null or a live handle.
 */
double mn_geometry_radius(const struct MnGeometry *geometry);

/**
 * Diameter of the sharp edge (m). NaN for a null handle.
 *
 * # Safety
 * `geometry` must be null or a live handle.
 */
double mn_geometry_diameter(const struct MnGeometry *geometry);

/**
 * NaN for a null handle.
 *
 * # Safety
 * `geometry` must be null or a live handle.
 */
double mn_geometry_thickness(const struct MnGeometry *geometry);

/**
 * NaN for a null handle.
 *
 * # Safety
 * `geometry` must be null or a live handle.
 */
double mn_geometry_mass(const struct MnGeometry *geometry);

/**
 * Fundamental longitudinal angular frequency (rad/s). NaN for a null handle.
 *
 * # Safety
 * `geometry` must be null or a live handle.
 */
double mn_geometry_fundamental_frequency(const struct MnGeometry *geometry);

/**
 * Thickness over curvature radius. NaN for a null handle.
 *
 * # Safety
 * `geometry` must be null or a live handle.
 */
double mn_geometry_paraxiality_ratio(const struct MnGeometry *geometry);

/**
 * Zero-frequency effective susceptibility. On `BudgetExceeded` the partial
 * sum is still written to `*out`.
 *
 * # Safety
 * `geometry` must be a live handle and `out` writable.
 */
enum MnStatus mn_chi0(const struct MnGeometry *geometry,
                      double waist,
                      double offset,
                      double epsilon,
                      uint64_t max_modes,
                      struct MnChiResult *out);

/**
 * Effective susceptibility at angular frequency `omega`, with the loss
 * angle the geometry was built with.
 *
 * # Safety
 * `geometry` must be a live handle and `out` writable.
 */
enum MnStatus mn_chi(const struct MnGeometry *geometry,
                     double waist,
                     double offset,
                     double omega,
                     double epsilon,
                     uint64_t max_modes,
                     struct MnChiResult *out);

/**
 * Thermal force and displacement spectra at one frequency.
 *
 * # Safety
 * `geometry` must be a live handle and `out` writable.
 */
enum MnStatus mn_spectrum_point(const struct MnGeometry *geometry,
                                double waist,
                                double offset,
                                double omega,
                                double temperature,
                                double epsilon,
                                uint64_t max_modes,
                                struct MnSpectrumPoint *out);

/**
 * Optical-mass estimate for a centered beam: writes the mass (kg) and the
 * single-oscillator susceptibility (m/N).
 *
 * # Safety
 * `geometry` must be a live handle; `optical_mass` and `chi_approx` writable.
 */
enum MnStatus mn_optical_mass(const struct MnGeometry *geometry,
                              double waist,
                              double *optical_mass,
                              double *chi_approx);

#endif  /* MIRNOISE_H */
