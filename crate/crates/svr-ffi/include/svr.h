#ifndef SVR_H
#define SVR_H

/* Generated by cbindgen from svr-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum SvrStatus {
  /**
   * The call succeeded.
   */
  SVR_OK = 0,
  /**
   * A pointer argument was null.
   */
  SVR_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  SVR_INVALID_UTF8 = 2,
  /**
   * The requested definition does not exist or is not runnable.
   */
  SVR_NOT_FOUND = 3,
  /**
   * An internal panic was caught; the handle is still valid.
   */
  SVR_INTERNAL = 4,
} SvrStatus;

/**
 * An elaborated module (opaque).
 */
typedef struct SvrModule SvrModule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse and elaborate a module from source. Always produces a handle on
 * success of the call itself; parse and check failures are recorded in
 * the module's report. `machine_fuel` of 0 selects the default budget.
 *
 * # Safety
 * `source` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. The returned handle must be released with
 * [`svr_module_free`].
 */
enum SvrStatus svr_module_load(const char *source, uint64_t machine_fuel, struct SvrModule **out);

/**
 * Release a module handle. A null handle is ignored.
 *
 * # Safety
 * `module` must be a handle from [`svr_module_load`], not yet freed.
 */
void svr_module_free(struct SvrModule *module);

/**
 * The check report of a loaded module, as JSON.
 *
 * # Safety
 * `module` must be a live handle; `out_json` must be valid. The returned
 * string must be released with [`svr_string_free`].
 */
enum SvrStatus svr_module_report_json(const struct SvrModule *module,
                                      bool emit_derivations,
                                      char **out_json);

/**
 * Run a definition on the abstract machine; the outcome is returned as a
 * JSON report. `fuel` of 0 selects the default.
 *
 * # Safety
 * `module` must be a live handle; `main_name` a valid string; `out_json`
 * valid. Release the string with [`svr_string_free`].
 */
enum SvrStatus svr_module_run_json(const struct SvrModule *module,
                                   const char *main_name,
                                   uint64_t fuel,
                                   char **out_json);

/**
 * Decide an equivalence between two expressions in the module's scope;
 * the verdict and certificate are returned as a JSON report.
 *
 * # Safety
 * `module` must be a live handle; `lhs`/`rhs` valid strings; `out_json`
 * valid. Release the string with [`svr_string_free`].
 */
enum SvrStatus svr_module_equiv_json(const struct SvrModule *module,
                                     const char *lhs,
                                     const char *rhs,
                                     uint64_t machine_fuel,
                                     char **out_json);

/**
 * Release a string returned by this library. A null pointer is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void svr_string_free(char *s);

/**
 * Library version as a static string; do not free.
 */
const char *svr_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SVR_H */
