#ifndef ROUNDED_REACH_H
#define ROUNDED_REACH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum RrStatus {
  RrStatus_Ok = 0,
  /**
   * The instance lies outside every implemented procedure.
   */
  RrStatus_Undecided = 2,
  RrStatus_NullArgument = -1,
  RrStatus_InvalidUtf8 = -2,
  RrStatus_Parse = -3,
  RrStatus_Validation = -4,
  RrStatus_Unsupported = -5,
  RrStatus_TooLarge = -6,
  RrStatus_GadgetBroken = -7,
  RrStatus_Internal = -8,
  RrStatus_Panic = -9,
} RrStatus;

/**
 * A parsed instance.
 */
typedef struct RrInstance RrInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse a JSON instance. On success `*out` owns a handle for `rr_instance_free`.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a writable pointer.
 */
enum RrStatus rr_instance_parse(const char *json, struct RrInstance **out);

/**
 * # Safety
 * `inst` must come from `rr_instance_parse` and not be freed twice. Null is ignored.
 */
void rr_instance_free(struct RrInstance *inst);

/**
 * Decide reachability; `*out_json` receives the verdict object.
 * Returns `Undecided` (with a verdict object) when no implemented procedure applies.
 *
 * # Safety
 * `inst` must be a live handle and `out_json` a writable pointer.
 */
enum RrStatus rr_decide(const struct RrInstance *inst, char **out_json);

/**
 * Simulate up to `steps` steps, stopping at the target; `*out_json` receives `{"hit", "states"}`.
 *
 * # Safety
 * `inst` must be a live handle and `out_json` a writable pointer.
 */
enum RrStatus rr_simulate(const struct RrInstance *inst, uint64_t steps, char **out_json);

/**
 * Compile a formula (text syntax or QDIMACS) into an instance JSON document.
 * `family` is `floor`, `ceil` or `minerr`; `factor` may be null or a rational such as `11/10`.
 *
 * # Safety
 * String arguments must be valid NUL-terminated strings (or null for `factor`).
 */
enum RrStatus rr_compile_qbf(const char *formula,
                             const char *family,
                             const char *factor,
                             char **out_json);

/**
 * Rotate every lattice point of the disk of radius `radius` by `theta` with minimal-error
 * rounding; `*out_csv` receives the `x,y,first_generation` grid.
 *
 * # Safety
 * `theta` must be a valid NUL-terminated string and `out_csv` a writable pointer.
 */
enum RrStatus rr_rotate(uint64_t radius, const char *theta, uint64_t budget, char **out_csv);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void rr_string_free(char *s);

/**
 * Message for the last failure on this thread; valid until the next call on the same thread.
 */
const char *rr_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROUNDED_REACH_H */
