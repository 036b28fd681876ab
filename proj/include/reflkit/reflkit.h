#ifndef REFLKIT_REFLKIT_H
#define REFLKIT_REFLKIT_H

#include <stddef.h>

#if defined(REFLKIT_BUILDING)
#define REFLKIT_API __attribute__((visibility("default")))
#else
#define REFLKIT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values 1..15 mirror reflkit::ErrorCode. */
typedef enum reflkit_status {
  REFLKIT_OK = 0,
  REFLKIT_INVALID_ARGUMENT = 1,
  REFLKIT_OUT_OF_RANGE = 2,
  REFLKIT_UNSUPPORTED_ORDER = 3,
  REFLKIT_UNCLASSIFIABLE = 4,
  REFLKIT_STIFFNESS = 5,
  REFLKIT_NEAR_SINGULAR_ALPHA = 6,
  REFLKIT_POLE = 7,
  REFLKIT_CONVERGENCE_FAILURE = 8,
  REFLKIT_INTEGRATION_FAILURE = 9,
  REFLKIT_REQUIRES_EPSILON_SHIFT = 10,
  REFLKIT_NEAR_EIGENVALUE = 11,
  REFLKIT_DIVERGENT_COEFFICIENT = 12,
  REFLKIT_MEAN_FREE_VIOLATION = 13,
  REFLKIT_CONFIG_ERROR = 14,
  REFLKIT_IO_ERROR = 15,
  REFLKIT_BUFFER_TOO_SMALL = 100,
  REFLKIT_INTERNAL_ERROR = 101
} reflkit_status;

/* Immutable potential model. */
typedef struct reflkit_model reflkit_model;

/* Message of the last failing call on this thread ("" if none). */
REFLKIT_API const char* reflkit_last_error(void);
REFLKIT_API const char* reflkit_status_name(int status);
REFLKIT_API const char* reflkit_version(void);

REFLKIT_API int reflkit_model_from_json(const char* json_text, reflkit_model** out);
REFLKIT_API int reflkit_model_from_file(const char* path, reflkit_model** out);
REFLKIT_API void reflkit_model_free(reflkit_model* model);

REFLKIT_API int reflkit_model_V(const reflkit_model* model, double x, double* out);
REFLKIT_API int reflkit_model_f(const reflkit_model* model, double x, double* out);

/* U(x, y; k) as {alpha+, beta+, alpha-, beta-}, each (re, im): 8 doubles. */
REFLKIT_API int reflkit_transfer_matrix(const reflkit_model* model, double x, double y, double k_re,
                                        double k_im, double out[8]);
/* {tau, R_l, R_r} on [y, x], each (re, im): 6 doubles. */
REFLKIT_API int reflkit_scattering(const reflkit_model* model, double x, double y, double k_re,
                                   double k_im, double out[6]);
/* R_r(x, -inf; k); real k is shifted by the default epsilon. */
REFLKIT_API int reflkit_reflect_semiinf(const reflkit_model* model, double x, double k_re,
                                        double k_im, double out[2]);
/* R^(x, -inf; W, a = 1; k). */
REFLKIT_API int reflkit_rhat_semiinf(const reflkit_model* model, double x, double W, double k_re,
                                     double k_im, double out[2]);
/* Green function from the reflection route (out[0..1]) and the Wronskian route (out[2..3]). */
REFLKIT_API int reflkit_green(const reflkit_model* model, double x, double y, double k_re,
                              double k_im, double out[4]);
/* r^_0 .. r^_N at (x, W): N + 1 doubles. */
REFLKIT_API int reflkit_low_coefficients(const reflkit_model* model, double x, double W, int N,
                                         double* out);
/* sum_{n=1}^{N} c^_n / (2ik)^n with xi = 0, mu = 1. */
REFLKIT_API int reflkit_high_series(const reflkit_model* model, double x, double k_re, double k_im,
                                    int N, double out[2]);

/* Text form of c^_n. Writes at most cap bytes including the terminator; *needed
   receives the full size. Returns REFLKIT_BUFFER_TOO_SMALL if cap is short. */
REFLKIT_API int reflkit_chat_string(int n, char* buf, size_t cap, size_t* needed);

/* Runs a CLI subcommand. config_path may be NULL or "" for flags-only runs;
   overrides_json is a flat JSON object or NULL. Returns the process exit code
   (0 ok, 1 check failure, 2 config error, 3 numerical failure). Diagnostics go
   to stderr. */
REFLKIT_API int reflkit_run_command(const char* command, const char* config_path,
                                    const char* overrides_json);

#ifdef __cplusplus
}
#endif

#endif
