/* otma — optimal-transport / Monge-Ampère geometry toolkit, C API.
 *
 * All functions are thread-safe as long as each handle is used from one
 * thread at a time. Constructors return NULL on failure; functions return
 * an otma_status. In both cases otma_last_error() carries a message for
 * the calling thread.
 *
 * Conventions: points are double[3]; 6x6 metric matrices are row-major
 * double[36]; boxes are double[6] as (lo1, hi1, lo2, hi2, lo3, hi3);
 * 3x3 matrices are row-major double[9].
 */
#ifndef OTMA_H
#define OTMA_H

#include <stddef.h>

#if defined(_WIN32)
#define OTMA_API __declspec(dllexport)
#else
#define OTMA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum otma_status {
  OTMA_OK = 0,
  OTMA_ERR_INVALID_ARGUMENT = 1, /* bad input (shape, degree, precondition) */
  OTMA_ERR_DEGENERATE = 2,       /* symplectic form degenerates at the point */
  OTMA_ERR_DOMAIN = 3,           /* boundary proximity or non-positive density */
  OTMA_ERR_CONFIG = 4,           /* malformed or invalid run configuration */
  OTMA_ERR_TOLERANCE = 5,        /* run completed but a tolerance failed */
  OTMA_ERR_INTERNAL = 6
} otma_status;

/* Message for the most recent failure on the calling thread. */
OTMA_API const char* otma_last_error(void);

typedef struct otma_cost otma_cost;
typedef struct otma_density otma_density;
typedef struct otma_structure otma_structure;

/* ---- costs ---- */

/* c(x, xbar) = -x . xbar */
OTMA_API otma_cost* otma_cost_quadratic(void);
/* c = f^2 [ (x-X)^2/2 + (y-Y)^2/2 - zZ ], f > 0 */
OTMA_API otma_cost* otma_cost_semigeostrophic(double coriolis_f);
/* c = -x . A xbar, A row-major */
OTMA_API otma_cost* otma_cost_bilinear(const double a[9]);

/* Custom cost; derivatives are taken by finite differences. */
typedef double (*otma_cost_fn)(const double x[3], const double xbar[3], void* user);
OTMA_API otma_cost* otma_cost_custom(otma_cost_fn fn, void* user);

OTMA_API void otma_cost_free(otma_cost* cost);

/* ---- densities (truncated and renormalized on their box) ---- */

OTMA_API otma_density* otma_density_uniform(const double box[6]);
OTMA_API otma_density* otma_density_gaussian(const double box[6], const double mean[3],
                                             const double cov[9]);
OTMA_API void otma_density_free(otma_density* density);

/* ---- Monge-Ampère structure (omega_c, alpha) ---- */

/* The structure copies its ingredients; the handles may be freed after. */
OTMA_API otma_structure* otma_structure_new(const otma_cost* cost, const otma_density* rho,
                                            const otma_density* rhobar);
OTMA_API void otma_structure_free(otma_structure* s);

/* Lychagin-Roubtsov metric from the contraction identity. */
OTMA_API otma_status otma_lr_metric(const otma_structure* s, const double x[3],
                                    const double xbar[3], double out[36]);
/* Kim-McCann-Warren metric. */
OTMA_API otma_status otma_kmw_metric(const otma_structure* s, const double x[3],
                                     const double xbar[3], double out[36]);
/* Conformal factor (rho rhobar)^{2/3} and max-norm relative defect of
 * g_LR = factor * h_KMW at the point. */
OTMA_API otma_status otma_conformal_defect(const otma_structure* s, const double x[3],
                                           const double xbar[3], double* factor,
                                           double* relative_defect);
/* Max absolute coefficient of omega_c ^ alpha at the point (0 = effective). */
OTMA_API otma_status otma_effectiveness_defect(const otma_structure* s, const double x[3],
                                               const double xbar[3], double* defect);
/* Eigenvalue signature of a symmetric 6x6 matrix: counts > tol, < -tol,
 * within tol, written to out[3] in that order. */
OTMA_API otma_status otma_metric_signature(const double m[36], double tol, int out[3]);

/* Semigeostrophic energy integrand. */
OTMA_API otma_status otma_sg_cost(const double x[3], const double bigx[3], double coriolis_f,
                                  double* out);

/* ---- discrete solvers ---- */

/* Exact uniform-weight assignment on an n x n cost matrix (row-major).
 * Writes the optimal permutation (row i -> perm[i]), dual potentials in the
 * convention u_i + ubar_j >= -C_ij, and the primal/dual values. Any output
 * pointer may be NULL to skip it. */
OTMA_API otma_status otma_solve_assignment(int n, const double* cost, int* perm, double* u,
                                           double* ubar, double* primal, double* dual);

/* Entropic solver with log-domain updates on an n x m cost matrix. mu, nu
 * are positive weights summing to 1. plan is n x m row-major. Outputs may
 * be NULL. */
OTMA_API otma_status otma_sinkhorn(int n, int m, const double* cost, const double* mu,
                                   const double* nu, double epsilon, int max_iter, double tol,
                                   double* plan, double* u, double* ubar, int* iterations,
                                   double* marginal_defect);

/* ---- batch runner ---- */

/* Execute a JSON run configuration (the same schema the CLI consumes).
 * On OTMA_OK and OTMA_ERR_TOLERANCE, *report_json receives the report
 * document and, when the config requested per-point output, *points_csv
 * the CSV table (otherwise NULL). Free both with otma_string_free.
 * points_csv may be NULL if the caller does not want it. */
OTMA_API otma_status otma_run_json(const char* config_json, char** report_json,
                                   char** points_csv);

OTMA_API void otma_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* OTMA_H */
