#ifndef AMOEBOT_LE_H
#define AMOEBOT_LE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AleStatus {
  ALE_STATUS_OK = 0,
  ALE_STATUS_NULL_POINTER = 1,
  ALE_STATUS_INVALID_UTF8 = 2,
  ALE_STATUS_INVALID_CONFIG = 3,
  ALE_STATUS_INVALID_ARGUMENT = 4,
  ALE_STATUS_NOT_ACTIVABLE = 5,
  ALE_STATUS_EMPTY_HISTORY = 6,
  ALE_STATUS_CHECK_FAILED = 7,
  ALE_STATUS_PANIC = 8,
} AleStatus;

/**
 * Opaque configuration handle.
 */
typedef struct AleConfig AleConfig;

/**
 * Opaque interactive session handle.
 */
typedef struct AleSession AleSession;

typedef struct AleRunSummary {
  uint64_t steps;
  /**
   * 1 when the run ended with no activable particle.
   */
  uint8_t terminal;
  uint32_t leaders;
  /**
   * Failed checks; zero unless verification was requested.
   */
  uint64_t violations;
} AleRunSummary;

typedef struct AleMcSummary {
  uint64_t instances;
  uint64_t passed;
  uint64_t failed;
  uint64_t cyclic;
  uint64_t total_states;
} AleMcSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library on this thread.
 */
const char *ale_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void ale_string_free(char *s);

/**
 * Parses the JSON configuration format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum AleStatus ale_config_parse(const char *json, struct AleConfig **out);

/**
 * Seeded random connected configuration.
 *
 * # Safety
 * `out` must be writable.
 */
enum AleStatus ale_config_generate(size_t n,
                                   double expanded_fraction,
                                   double hole_bias,
                                   uint64_t seed,
                                   struct AleConfig **out);

/**
 * # Safety
 * `config` must be NULL or a handle from this library, not yet freed.
 */
void ale_config_free(struct AleConfig *config);

/**
 * Number of particles, or 0 for NULL.
 *
 * # Safety
 * `config` must be NULL or a live handle.
 */
size_t ale_config_len(const struct AleConfig *config);

/**
 * JSON in pid order.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum AleStatus ale_config_to_json(const struct AleConfig *config, char **out);

/**
 * ASCII (`svg` = 0) or SVG (`svg` != 0) drawing with all annotations.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum AleStatus ale_config_render(const struct AleConfig *config, uint8_t svg, char **out);

/**
 * Runs the scheduler. `trace_out` may be NULL; otherwise it receives the
 * trace as JSON lines.
 *
 * # Safety
 * `config` must be a live handle, `strategy` a NUL-terminated string,
 * `summary` writable, `trace_out` NULL or writable.
 */
enum AleStatus ale_run(const struct AleConfig *config,
                       const char *strategy,
                       uint64_t seed,
                       uint64_t max_steps,
                       uint8_t verify,
                       struct AleRunSummary *summary,
                       char **trace_out);

/**
 * Replays a trace and checks every step. Returns
 * [`AleStatus::CheckFailed`] on a replay mismatch or any violation.
 *
 * # Safety
 * `trace` must be a NUL-terminated string; `violations` NULL or writable.
 */
enum AleStatus ale_trace_check(const char *trace, uint64_t *violations);

/**
 * Explores every connected instance of `n` particles.
 *
 * # Safety
 * `out` must be writable.
 */
enum AleStatus ale_modelcheck(size_t n,
                              uint8_t allow_expanded,
                              size_t budget,
                              struct AleMcSummary *out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum AleStatus ale_session_new(const char *json, struct AleSession **out);

/**
 * # Safety
 * `session` must be NULL or a handle from this library, not yet freed.
 */
void ale_session_free(struct AleSession *session);

/**
 * # Safety
 * `session` must be a live handle.
 */
enum AleStatus ale_session_activate(struct AleSession *session, uint32_t pid);

/**
 * # Safety
 * `session` must be a live handle; `strategy` a NUL-terminated string.
 */
enum AleStatus ale_session_auto(struct AleSession *session,
                                const char *strategy,
                                uint64_t steps,
                                uint64_t seed);

/**
 * # Safety
 * `session` must be a live handle.
 */
enum AleStatus ale_session_undo(struct AleSession *session);

/**
 * Current state in the service's JSON schema.
 *
 * # Safety
 * `session` must be a live handle; `out` must be writable.
 */
enum AleStatus ale_session_state_json(const struct AleSession *session, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AMOEBOT_LE_H */
