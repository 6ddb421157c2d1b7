#ifndef ECKIT_H
#define ECKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EckitStatus {
  ECKIT_STATUS_OK = 0,
  ECKIT_STATUS_NULL_ARGUMENT = 1,
  ECKIT_STATUS_INVALID_UTF8 = 2,
  ECKIT_STATUS_FORMAT = 3,
  ECKIT_STATUS_TRANSLATE = 4,
  ECKIT_STATUS_ENGINE = 5,
  ECKIT_STATUS_PANIC = 6,
} EckitStatus;

/**
 * An automaton.
 */
typedef struct EckitAutomaton EckitAutomaton;

/**
 * An ultimately periodic word with its proposition names.
 */
typedef struct EckitUpWord EckitUpWord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into this library on the same thread.
 */
const char *eckit_last_error(void);

/**
 * Parses an automaton document.
 *
 * # Safety
 * `json` is NULL or NUL-terminated; `out` is NULL or writable.
 */
enum EckitStatus eckit_automaton_from_json(const char *json, struct EckitAutomaton **out);

/**
 * Serializes an automaton; free the result with [`eckit_string_free`].
 *
 * # Safety
 * `a` is NULL or a live handle; `out` is NULL or writable.
 */
enum EckitStatus eckit_automaton_to_json(const struct EckitAutomaton *a, char **out);

/**
 * Number of control states.
 *
 * # Safety
 * `a` is NULL or a live handle.
 */
size_t eckit_automaton_state_count(const struct EckitAutomaton *a);

/**
 * Number of clocks, normal and event.
 *
 * # Safety
 * `a` is NULL or a live handle.
 */
size_t eckit_automaton_clock_count(const struct EckitAutomaton *a);

/**
 * Largest constant in any guard.
 *
 * # Safety
 * `a` is NULL or a live handle.
 */
uint32_t eckit_automaton_max_constant(const struct EckitAutomaton *a);

/**
 * # Safety
 * `a` is NULL or a handle not yet freed.
 */
void eckit_automaton_free(struct EckitAutomaton *a);

/**
 * Parses an `upword` document.
 *
 * # Safety
 * `json` is NULL or NUL-terminated; `out` is NULL or writable.
 */
enum EckitStatus eckit_upword_from_json(const char *json, struct EckitUpWord **out);

/**
 * # Safety
 * `w` is NULL or a handle not yet freed.
 */
void eckit_upword_free(struct EckitUpWord *w);

/**
 * Decides acceptance; writes the verdict to `out`.
 *
 * # Safety
 * `a` and `w` are NULL or live handles; `out` is NULL or writable.
 */
enum EckitStatus eckit_accepts(const struct EckitAutomaton *a,
                               const struct EckitUpWord *w,
                               bool *out);

/**
 * Removes every event clock into a new handle.
 *
 * # Safety
 * `a` is NULL or a live handle; `out` is NULL or writable.
 */
enum EckitStatus eckit_remove_all_event_clocks(const struct EckitAutomaton *a,
                                               struct EckitAutomaton **out);

/**
 * Removes the event clock named `clock` into a new handle.
 *
 * # Safety
 * `a` is NULL or a live handle; `clock` is NULL or NUL-terminated; `out`
 * is NULL or writable.
 */
enum EckitStatus eckit_remove_clock(const struct EckitAutomaton *a,
                                    const char *clock,
                                    struct EckitAutomaton **out);

/**
 * # Safety
 * `s` is NULL or a string returned by this library and not yet freed.
 */
void eckit_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ECKIT_H */
