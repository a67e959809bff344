#ifndef MCKV_H
#define MCKV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes of every call.
 */
typedef enum MckvStatus {
  MCKV_STATUS_OK = 0,
  MCKV_STATUS_NULL_POINTER = 1,
  MCKV_STATUS_INVALID_ARGUMENT = 2,
  MCKV_STATUS_NUMERICAL = 3,
  MCKV_STATUS_PANIC = 4,
} MckvStatus;

/*
 Stationary solutions `(m1, m2)` at one `sigma`.
 */
typedef struct MckvFixedPoints MckvFixedPoints;

/*
 Particle ensemble with its step configuration.
 */
typedef struct MckvParticles MckvParticles;

/*
 Deterministic PDE state with its integrator.
 */
typedef struct MckvPde MckvPde;

/*
 Stochastic equation with power-law covariance.
 */
typedef struct MckvSpde MckvSpde;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len`) and returns its full length without the NUL.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
size_t mckv_last_error_message(char *buf, size_t len);

/*
 Critical diffusion `sigma_c` and `f_c(sigma_c)`.

 # Safety
 Output pointers must be valid or null (null is reported).
 */
enum MckvStatus mckv_sigma_c(double tol, double *out_sigma_c, double *out_residual);

/*
 # Safety
 `out` must be valid or null.
 */
enum MckvStatus mckv_f_c(double sigma, double *out);

/*
 `int_T cos(2 n x) exp(z cos 2x) dx`.

 # Safety
 `out` must be valid or null.
 */
enum MckvStatus mckv_bessel_i(uint32_t n, double z, double *out);

/*
 # Safety
 `out` must be valid or null; the handle is released with
 [`mckv_fixed_points_free`].
 */
enum MckvStatus mckv_fixed_points_new(double sigma, double tol, struct MckvFixedPoints **out);

/*
 # Safety
 Pointers must be valid or null.
 */
enum MckvStatus mckv_fixed_points_count(const struct MckvFixedPoints *fp, size_t *out);

/*
 # Safety
 Pointers must be valid or null.
 */
enum MckvStatus mckv_fixed_points_get(const struct MckvFixedPoints *fp,
                                      size_t i,
                                      double *m1,
                                      double *m2);

/*
 # Safety
 `fp` must come from [`mckv_fixed_points_new`] and not be used afterwards.
 */
void mckv_fixed_points_free(struct MckvFixedPoints *fp);

/*
 Creates a PDE integrator at truncation `order` started from the uniform
 density. Other parameters take the library defaults.

 # Safety
 `out` must be valid or null.
 */
enum MckvStatus mckv_pde_new(double sigma, size_t order, double dt, struct MckvPde **out);

/*
 # Safety
 `pde` must be valid or null.
 */
enum MckvStatus mckv_pde_set_uniform(struct MckvPde *pde);

/*
 Replaces the state by grid samples on `len` equispaced nodes, normalized
 to unit mass, and resets the time.

 # Safety
 `values` must be valid for `len` reads.
 */
enum MckvStatus mckv_pde_set_density(struct MckvPde *pde, const double *values, size_t len);

/*
 # Safety
 `pde` must be valid or null.
 */
enum MckvStatus mckv_pde_advance(struct MckvPde *pde, size_t steps);

/*
 # Safety
 Pointers must be valid or null.
 */
enum MckvStatus mckv_pde_moments(const struct MckvPde *pde,
                                 double *t,
                                 double *m1,
                                 double *m2,
                                 double *mass);

/*
 Evaluates the density on `len` equispaced nodes; `len` must be even
 and at least `2 order + 2`.

 # Safety
 `out` must be valid for `len` writes.
 */
enum MckvStatus mckv_pde_grid(const struct MckvPde *pde, double *out, size_t len);

/*
 # Safety
 `pde` must come from [`mckv_pde_new`] and not be used afterwards.
 */
void mckv_pde_free(struct MckvPde *pde);

/*
 Creates an SPDE solver with `lambda_k^2 = c (1 + k^2)^{-gamma}`, started
 from the uniform density.

 # Safety
 `out` must be valid or null.
 */
enum MckvStatus mckv_spde_new(double sigma,
                              size_t order,
                              double dt,
                              double gamma,
                              double c,
                              uint64_t seed,
                              struct MckvSpde **out);

/*
 # Safety
 `spde` must be valid or null.
 */
enum MckvStatus mckv_spde_advance(struct MckvSpde *spde, size_t steps);

/*
 # Safety
 Pointers must be valid or null.
 */
enum MckvStatus mckv_spde_moments(const struct MckvSpde *spde,
                                  double *t,
                                  double *m1,
                                  double *m2,
                                  double *mass);

/*
 # Safety
 `spde` must come from [`mckv_spde_new`] and not be used afterwards.
 */
void mckv_spde_free(struct MckvSpde *spde);

/*
 `n` particles drawn uniformly on the torus.

 # Safety
 `out` must be valid or null.
 */
enum MckvStatus mckv_particles_new(size_t n,
                                   double sigma,
                                   double dt,
                                   uint64_t seed,
                                   struct MckvParticles **out);

/*
 # Safety
 `p` must be valid or null.
 */
enum MckvStatus mckv_particles_advance(struct MckvParticles *p, size_t steps);

/*
 # Safety
 Pointers must be valid or null.
 */
enum MckvStatus mckv_particles_moments(const struct MckvParticles *p, double *m1, double *m2);

/*
 Copies positions into `out`, which must hold exactly the ensemble size.

 # Safety
 `out` must be valid for `len` writes.
 */
enum MckvStatus mckv_particles_positions(const struct MckvParticles *p, double *out, size_t len);

/*
 # Safety
 `p` must come from [`mckv_particles_new`] and not be used afterwards.
 */
void mckv_particles_free(struct MckvParticles *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MCKV_H */
