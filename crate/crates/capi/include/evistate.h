/* C ABI for the evistate engine. Generated by cbindgen; do not edit. */

#ifndef EVISTATE_H
#define EVISTATE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/* Opaque scenario handle. */
typedef struct EvistateScenario EvistateScenario;

#define EVISTATE_OK 0

#define EVISTATE_ERR_ARG 1

#define EVISTATE_ERR_INPUT 2

#define EVISTATE_ERR_ENGINE 3

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the underlying engine as a static string; do not free.
 */
const char *evistate_version(void);

/**
 * Copies the calling thread's last error message; null when none. Free
 * with `evistate_string_free`.
 */
char *evistate_last_error_message(void);

/**
 * Parses and validates scenario text into an opaque handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 */
int evistate_scenario_parse(const char *text, EvistateScenario **out);

/**
 * Releases a scenario handle; null is ignored.
 *
 * # Safety
 * `handle` must come from `evistate_scenario_parse` and not be used again.
 */
void evistate_scenario_free(EvistateScenario *handle);

/**
 * Renders a scenario in canonical text form.
 *
 * # Safety
 * `handle` must be a live scenario handle; `out` must be valid.
 */
int evistate_scenario_render(const EvistateScenario *handle, char **out);

/**
 * Copies a builtin scenario's text; names: fig1, s2, trial, independent.
 *
 * # Safety
 * `name` must be NUL-terminated; `out` must be valid.
 */
int evistate_builtin_text(const char *name, char **out);

/**
 * Runs every pipeline and metric of a scenario; writes the JSON report.
 *
 * # Safety
 * `handle` must be a live scenario handle; `out` must be valid.
 */
int evistate_run_json(const EvistateScenario *handle, char **out);

/**
 * Audits the causal-breadth constraint per pipeline; writes the JSON
 * report.
 *
 * # Safety
 * `handle` must be a live scenario handle; `out` must be valid.
 */
int evistate_audit_json(const EvistateScenario *handle, char **out);

/**
 * Compares two pipeline orders by label; writes the JSON comparison.
 *
 * # Safety
 * `handle` must be a live scenario handle; `a`, `b` NUL-terminated; `out`
 * valid.
 */
int evistate_compare_json(const EvistateScenario *handle, const char *a, const char *b, char **out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `ptr` must come from this library and not be freed twice.
 */
void evistate_string_free(char *ptr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVISTATE_H */
