/* C interface to the hypcusp library.
 *
 * Every fallible call returns an hc_status; on failure hc_last_error() holds
 * a message for the calling thread until its next failing call. Strings
 * returned through char** are owned by the caller and released with
 * hc_string_free. Handles are released with their matching *_free function,
 * which accepts NULL.
 */
#ifndef HYPCUSP_H
#define HYPCUSP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(HC_BUILDING_LIBRARY)
#    define HC_API __declspec(dllexport)
#  else
#    define HC_API __declspec(dllimport)
#  endif
#else
#  define HC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hc_status {
  HC_OK = 0,
  HC_ERR_INVALID_ARGUMENT = 1,
  HC_ERR_DOMAIN = 2,
  HC_ERR_INTEGRATION = 3, /* blow-up or failed shooting */
  HC_ERR_NUMERICAL = 4,   /* tangency, failed tail closure, self-test */
  HC_ERR_IO = 5,
  HC_ERR_INTERNAL = 6
} hc_status;

HC_API const char* hc_version(void);
HC_API const char* hc_status_name(hc_status status);
HC_API const char* hc_last_error(void);
HC_API void hc_string_free(char* s);

/* ---- half-space model and polar charts ---- */

typedef struct hc_halfspace_point {
  double x, y, t;
} hc_halfspace_point;

typedef struct hc_metric_diag {
  double gtt, gRR, gthth;
} hc_metric_diag;

/* gamma[k][i][j]: coefficient of e_k in nabla_{e_i} e_j, basis order (t, R, theta). */
typedef struct hc_connection {
  double gamma[3][3][3];
} hc_connection;

HC_API hc_status hc_phi_gamma(double t, double r, double theta, hc_halfspace_point* out);
HC_API hc_status hc_psi_gamma(double t, double R, double theta, hc_halfspace_point* out);
HC_API hc_status hc_metric_polar(double R, hc_metric_diag* out);
HC_API hc_status hc_pullback_metric_oracle(double t, double R, double theta, double h,
                                           hc_metric_diag* out, double* offdiag_residual);
HC_API hc_status hc_connection_table(double R, hc_connection* out);
HC_API hc_status hc_christoffel_oracle(double R, double h, hc_connection* out);

/* ---- revolution profiles ---- */

typedef struct hc_profile hc_profile;

typedef struct hc_fit {
  double rate, amplitude, window_start, window_end, residual;
} hc_fit;

HC_API hc_status hc_curvature_from_profile(double f, double fp, double fpp, double* out);
HC_API hc_status hc_fpp_from_curvature(double f, double fp, double k, double* out);

/* Backward integration from f(T) = eps, f'(T) = -sqrt(1-k) eps. With
 * truncate_on_blowup = 0 a blow-up before t = 0 fails with
 * HC_ERR_INTEGRATION; otherwise the regular part is returned and
 * hc_profile_diagnostic explains the truncation. */
HC_API hc_status hc_integrate_backward(double eps, double T, double k, double dt,
                                       int truncate_on_blowup, hc_profile** out);
HC_API hc_status hc_shoot_forward(double f0, double k, double T, double dt, hc_profile** out);
HC_API hc_status hc_profile_from_samples(double t0, double dt, const double* f, const double* fp,
                                         size_t n, hc_profile** out);
HC_API void hc_profile_free(hc_profile* p);

HC_API size_t hc_profile_size(const hc_profile* p);
HC_API double hc_profile_t0(const hc_profile* p);
HC_API double hc_profile_dt(const hc_profile* p);
HC_API double hc_profile_t_end(const hc_profile* p);
/* Copies min(size, capacity) samples; either output may be NULL. */
HC_API hc_status hc_profile_samples(const hc_profile* p, double* f, double* fp, size_t capacity);
/* Empty string when the profile covers its full requested range. */
HC_API const char* hc_profile_diagnostic(const hc_profile* p);
HC_API hc_status hc_profile_write_csv(const hc_profile* p, const char* path);

HC_API hc_status hc_default_fit_window(const hc_profile* p, double* start, double* end);
HC_API hc_status hc_decay_fit(const hc_profile* p, double start, double end, hc_fit* out);
HC_API hc_status hc_derivative_rate_check(const hc_profile* p, double k, int order, double start,
                                          double end, hc_fit* out, int* sign_pattern);
HC_API hc_status hc_extrinsic_curvature(const hc_profile* p, double t, double h, double theta,
                                        double* out);
HC_API hc_status hc_area_tail(const hc_profile* p, double t, double* out);
HC_API hc_status hc_volume_tail(const hc_profile* p, double t, double* out);

/* ---- planar loops ---- */

typedef struct hc_loop hc_loop;

typedef struct hc_point {
  double x, y;
} hc_point;

typedef struct hc_stokes_report {
  double lhs, rhs, residual, error_bound;
  int resolution;
} hc_stokes_report;

typedef double (*hc_field)(double x, double y, void* user);

HC_API hc_status hc_loop_from_points(const hc_point* points, size_t n, hc_loop** out);
/* name: "circle", "limacon" or "figure_eight". */
HC_API hc_status hc_loop_builtin(const char* name, size_t samples, hc_loop** out);
/* a e^{ins} + b e^{ims}. */
HC_API hc_status hc_loop_epicycle(double a, int n, double b, int m, size_t samples, hc_loop** out);
HC_API hc_status hc_loop_read_csv(const char* path, hc_loop** out);
HC_API hc_status hc_loop_write_csv(const hc_loop* loop, const char* path);
HC_API void hc_loop_free(hc_loop* loop);
HC_API size_t hc_loop_size(const hc_loop* loop);
HC_API hc_status hc_loop_points(const hc_loop* loop, hc_point* out, size_t capacity);

HC_API hc_status hc_winding_number(const hc_loop* loop, double x, double y, int* out);
HC_API hc_status hc_turning_index(const hc_loop* loop, int* out);
HC_API hc_status hc_is_convex(const hc_loop* loop, int* out);
/* *loops receives an array of *count handles; release with hc_loop_array_free. */
HC_API hc_status hc_decompose_simple_loops(const hc_loop* loop, hc_loop*** loops, size_t* count);
HC_API void hc_loop_array_free(hc_loop** loops, size_t count);

/* P and Q as polynomials of total degree `degree`, coefficients ordered
 * 1, x, y, x^2, xy, y^2, ... ((degree+1)(degree+2)/2 each). */
HC_API hc_status hc_stokes_polynomial(const hc_loop* loop, const double* p, const double* q,
                                      int degree, int resolution, hc_stokes_report* out);
/* dw is the density dQ/dx - dP/dy; it is checked against P and Q. */
HC_API hc_status hc_stokes_callback(const hc_loop* loop, hc_field P, hc_field Q, hc_field dw,
                                    void* user, int resolution, hc_stokes_report* out);
HC_API hc_status hc_winding_weighted_integral(const hc_loop* loop, hc_field density, void* user,
                                              int resolution, double* out);
/* {"lhs", "rhs", "residual", "resolution"} */
HC_API hc_status hc_stokes_report_json(const hc_stokes_report* report, char** json);

/* ---- cusp ends ---- */

typedef struct hc_family hc_family;

typedef enum hc_primitive { HC_PRIMITIVE_A = 0, HC_PRIMITIVE_B = 1 } hc_primitive;

typedef struct hc_quadrature {
  size_t loop_samples;
  int resolution;
  double lateral_step;
  double slice_step;
} hc_quadrature;

HC_API void hc_quadrature_defaults(hc_quadrature* q);

/* rho0 e^{-rho_rate t} e^{ins} + mu0 e^{-mu_rate t} e^{ims} on [t_min, t_max]. */
HC_API hc_status hc_family_epicycle(const char* id, double rho0, double rho_rate, int n, double mu0,
                                    double mu_rate, int m, double t_min, double t_max,
                                    hc_family** out);
/* p(t) e^{ins}; the family keeps its own reference to the profile. */
HC_API hc_status hc_family_from_profile(const char* id, const hc_profile* p, int n,
                                        double nominal_rate, hc_family** out);
HC_API void hc_family_free(hc_family* family);

/* q may be NULL for defaults. */
HC_API hc_status hc_V_of_t(const hc_family* family, hc_primitive primitive, double T, double t,
                           const hc_quadrature* q, double* out);
HC_API hc_status hc_winding_dvol(const hc_family* family, double T, double t,
                                 const hc_quadrature* q, double* out);
HC_API hc_status hc_decay_validator_json(const hc_family* family, double k, double delta,
                                         size_t slices, char** json, int* holds);
HC_API hc_status hc_convergence_report_json(const hc_family* family, hc_primitive primitive,
                                            double T, double horizon, size_t steps,
                                            const hc_quadrature* q, char** json, int* converged);

/* Seven identity checks; tolerance_override > 0 replaces every tolerance. */
HC_API hc_status hc_verify_ledger_json(double tolerance_override, uint64_t seed, int resolution,
                                       char** json, int* all_pass);

#ifdef __cplusplus
}
#endif

#endif /* HYPCUSP_H */
