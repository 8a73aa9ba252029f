#ifndef BUSVIEW_H
#define BUSVIEW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BvStatus {
  BV_STATUS_OK = 0,
  BV_STATUS_NULL_ARGUMENT = 1,
  BV_STATUS_INVALID_UTF8 = 2,
  BV_STATUS_IO = 3,
  BV_STATUS_BAD_INPUT = 4,
  BV_STATUS_NOT_FOUND = 5,
  BV_STATUS_BAD_REQUEST = 6,
  BV_STATUS_INTERNAL = 7,
} BvStatus;

/**
 * Opaque store handle.
 */
typedef struct BvStore BvStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads a snapshot file. On success `*out` owns a new handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BvStatus bv_store_open_snapshot(const char *path, struct BvStore **out);

/**
 * Ingests the four raw files into a new store. Rejected lines are dropped
 * as in the CLI; `max_boardings` is the over-capacity threshold.
 *
 * # Safety
 * All paths must be NUL-terminated strings and `out` a valid pointer.
 */
enum BvStatus bv_store_ingest(const char *adherence,
                              const char *counts,
                              const char *fares,
                              const char *network,
                              uint32_t max_boardings,
                              struct BvStore **out);

/**
 * Writes the store as a snapshot file.
 *
 * # Safety
 * `store` must be a live handle and `path` a NUL-terminated string.
 */
enum BvStatus bv_store_save_snapshot(const struct BvStore *store, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `store` must be null or a handle not yet freed.
 */
void bv_store_free(struct BvStore *store);

/**
 * Number of stop events in the store, 0 for null.
 *
 * # Safety
 * `store` must be null or a live handle.
 */
uint64_t bv_store_event_count(const struct BvStore *store);

/**
 * Answers an API request such as `path = "/api/calendar"`,
 * `query = "scope=route&id=R1"`. The response body, the same bytes the HTTP
 * server sends, is stored in `*out_json` for errors as well as successes;
 * `*out_http_status` receives the matching HTTP status.
 *
 * # Safety
 * `store` must be a live handle, `path` a NUL-terminated string, `query`
 * null or NUL-terminated, and both out pointers valid.
 */
enum BvStatus bv_store_query(const struct BvStore *store,
                             const char *path,
                             const char *query,
                             char **out_json,
                             uint16_t *out_http_status);

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *bv_last_error_message(void);

/**
 * Releases a string returned by `bv_store_query`. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void bv_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *bv_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BUSVIEW_H */
