#ifndef BKWEIGHTS_H
#define BKWEIGHTS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BkStatus {
  BK_STATUS_OK = 0,
  BK_STATUS_INVALID_INPUT = 2,
  BK_STATUS_PRECISION = 3,
  BK_STATUS_NULL_POINTER = 4,
  BK_STATUS_PANIC = 5,
} BkStatus;

/**
 * An inertial description: prime, residue degree and tame summands.
 */
typedef struct BkInert BkInert;

/**
 * A Breuil-Kisin module.
 */
typedef struct BkModule BkModule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *bk_last_error(void);

/**
 * Release a string returned by this library. Null is ignored.
 * Requires: `s` came from this library and has not been freed.
 */
void bk_string_free(char *s);

/**
 * Parse a module document.
 * Requires: `json` is a nul-terminated string; `out` is writable.
 */
enum BkStatus bk_module_from_json(const char *json, struct BkModule **out);

/**
 * The module spanned by the worked-example submodule for `(p, n, x)`.
 * Requires: `out` is writable.
 */
enum BkStatus bk_worked_example(uint32_t p, int64_t n, int64_t x, struct BkModule **out);

/**
 * Requires: `m` is null or a handle from this library that has not been freed.
 */
void bk_module_free(struct BkModule *m);

/**
 * Requires: `m` is a live handle; `rank` and `residue_degree` are writable.
 */
enum BkStatus bk_module_shape(const struct BkModule *m, size_t *rank, size_t *residue_degree);

/**
 * Weights per embedding as a JSON array of sorted arrays.
 * Requires: `m` is a live handle; `out` is writable.
 */
enum BkStatus bk_module_weights_json(const struct BkModule *m, char **out);

/**
 * Requires: `m` is a live handle; `out` is writable.
 */
enum BkStatus bk_module_is_strongly_divisible(const struct BkModule *m, bool *out);

/**
 * Serialize a module back to its JSON document.
 * Requires: `m` is a live handle; `out` is writable.
 */
enum BkStatus bk_module_to_json(const struct BkModule *m, char **out);

/**
 * Parse an inertial description document.
 * Requires: `json` is a nul-terminated string; `out` is writable.
 */
enum BkStatus bk_inert_from_json(const char *json, struct BkInert **out);

/**
 * Requires: `d` is null or a handle from this library that has not been freed.
 */
void bk_inert_free(struct BkInert *d);

/**
 * Membership of a weight tuple given as JSON, e.g. `[[-1,-1]]`.
 * Requires: `d` is a live handle; `weights_json` is a nul-terminated string; `out` is
 * writable.
 */
enum BkStatus bk_inert_member(const struct BkInert *d, const char *weights_json, bool *out);

/**
 * All weight tuples with entries in `[lo, hi]`, as a JSON array.
 * Requires: `d` is a live handle; `out` is writable.
 */
enum BkStatus bk_inert_enumerate_json(const struct BkInert *d, int64_t lo, int64_t hi, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BKWEIGHTS_H */
