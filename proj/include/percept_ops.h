#ifndef PERCEPT_OPS_H
#define PERCEPT_OPS_H

/* C interface to the percept_ops shared library.
 *
 * Every function returns a pops_status; on failure pops_last_error() holds a
 * message for the calling thread until its next call into the library.
 * Handles are opaque and owned by the caller (free with the matching _free).
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define POPS_API __declspec(dllexport)
#else
#define POPS_API __attribute__((visibility("default")))
#endif

typedef enum {
  POPS_OK = 0,
  POPS_ERR_ARGUMENT = 1,    /* null pointer or malformed option */
  POPS_ERR_DOMAIN = 2,      /* value outside an operation's domain */
  POPS_ERR_SCHEMA = 3,      /* input file does not match its schema */
  POPS_ERR_IO = 4,          /* unreadable or unwritable file */
  POPS_ERR_CONVERGENCE = 5, /* iterative solver failed */
  POPS_ERR_INTERNAL = 6
} pops_status;

typedef enum { POPS_AXIS_X = 0, POPS_AXIS_Y = 1 } pops_axis;

typedef enum { POPS_CHART_CURVE = 0, POPS_CHART_SCATTER = 1 } pops_chart;

POPS_API const char* pops_last_error(void);
POPS_API const char* pops_version(void);
POPS_API const char* pops_status_name(pops_status status);

/* Caps worker threads; 0 restores the PERCEPT_OPS_THREADS / hardware default. */
POPS_API void pops_set_threads(unsigned n);

/* Strings returned by the library. */
POPS_API void pops_string_free(char* s);

/* --- viewing context ------------------------------------------------------ */

typedef struct pops_context pops_context;

POPS_API pops_status pops_context_default(pops_chart chart, pops_context** out);
POPS_API pops_status pops_context_from_json(const char* json, pops_context** out);
POPS_API pops_status pops_context_to_json(const pops_context* ctx, char** out_json);
POPS_API void pops_context_free(pops_context* ctx);

/* Angle (degrees) of a coordinate measured from its axis origin, and back. */
POPS_API pops_status pops_value_to_va(const pops_context* ctx, pops_axis axis, double value,
                                      double* out_degrees);
POPS_API pops_status pops_va_to_value(const pops_context* ctx, pops_axis axis, double degrees,
                                      double* out_value);

/* --- skewed generalized t ----------------------------------------------------- */

typedef struct pops_sgt pops_sgt;

POPS_API pops_status pops_sgt_create(double mu, double sigma, double lambda, double p, double q,
                                     pops_sgt** out);
POPS_API void pops_sgt_free(pops_sgt* d);
POPS_API pops_status pops_sgt_pdf(const pops_sgt* d, double x, double* out);
POPS_API pops_status pops_sgt_cdf(const pops_sgt* d, double x, double* out);
POPS_API pops_status pops_sgt_quantile(const pops_sgt* d, double prob, double* out);
POPS_API pops_status pops_sgt_mode(const pops_sgt* d, double* out);

/* --- file-level commands ---------------------------------------------------------
 *
 * `command` is one of: fit, gen-stimuli, simulate, predict, evaluate, va,
 * validate. `options_json` is a JSON object with the command's options (same
 * names as the CLI flags, with '-' replaced by '_'). On success *out_json (if
 * non-null) receives a JSON result to be released with pops_string_free.
 * `validate` succeeds even for invalid files; the result lists the problems.
 */
POPS_API pops_status pops_run(const char* command, const char* options_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
