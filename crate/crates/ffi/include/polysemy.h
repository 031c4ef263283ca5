/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef POLYSEMY_H
#define POLYSEMY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PsxStatus {
  PSX_STATUS_OK = 0,
  PSX_STATUS_NULL_POINTER = 1,
  PSX_STATUS_INVALID_UTF8 = 2,
  PSX_STATUS_NO_SUCH_TERM = 3,
  PSX_STATUS_PARAMETER = 4,
  PSX_STATUS_NUMERICAL = 5,
  PSX_STATUS_IO = 6,
  PSX_STATUS_FORMAT = 7,
  PSX_STATUS_CONTRACT = 8,
  PSX_STATUS_STRUCTURE = 9,
  PSX_STATUS_PANIC = 10,
} PsxStatus;

// A corpus index. Create with `psx_index_from_text` or `psx_index_load`.
typedef struct PsxIndex PsxIndex;

// The result of analyzing one term.
typedef struct PsxReport PsxReport;

// Analysis parameters. `psx_config_default` fills in the defaults.
typedef struct PsxConfig {
  size_t k;
  double threshold;
  size_t mincount;
  size_t co_window;
  size_t bins;
  size_t smoothing_window;
  size_t candidate_min_freq;
  size_t candidate_max_freq;
  bool lowercase_only;
  size_t seed_bin_radius;
  double prominence_floor;
} PsxConfig;

typedef struct PsxPeak {
  size_t bin;
  double value;
  double prominence;
} PsxPeak;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL after a success.
// The pointer stays valid until the next call into this library on the same
// thread.
const char *psx_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *psx_version(void);

// Tokenizes `len` bytes of UTF-8 text and builds an index. When `delimiter`
// is non-NULL, lines equal to it separate documents.
//
// # Safety
// `text` must point to `len` readable bytes; `delimiter` must be NULL or a
// NUL-terminated string; `out` must be writable.
enum PsxStatus psx_index_from_text(const uint8_t *text,
                                   size_t len,
                                   const char *delimiter,
                                   struct PsxIndex **out);

// Reads a binary index file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum PsxStatus psx_index_load(const char *path, struct PsxIndex **out);

// Writes `index` to `path` in the binary index format.
//
// # Safety
// `index` must be a live handle and `path` a NUL-terminated string.
enum PsxStatus psx_index_save(const struct PsxIndex *index, const char *path);

// Releases an index. NULL is ignored.
//
// # Safety
// `index` must be NULL or a handle not yet freed.
void psx_index_free(struct PsxIndex *index);

// # Safety
// `index` must be a live handle and `out` writable.
enum PsxStatus psx_index_total_tokens(const struct PsxIndex *index, size_t *out);

// # Safety
// `index` must be a live handle and `out` writable.
enum PsxStatus psx_index_vocabulary_len(const struct PsxIndex *index, size_t *out);

// Corpus frequency of `term`; 0 when the term does not occur.
//
// # Safety
// `index` must be a live handle, `term` a NUL-terminated string and `out`
// writable.
enum PsxStatus psx_index_freq(const struct PsxIndex *index, const char *term, size_t *out);

// # Safety
// `out` must be writable.
enum PsxStatus psx_config_default(struct PsxConfig *out);

// Scores one term. `config` may be NULL for the defaults.
//
// # Safety
// `index` must be a live handle, `term` a NUL-terminated string, `config`
// NULL or readable, and `out` writable.
enum PsxStatus psx_analyze(const struct PsxIndex *index,
                           const char *term,
                           const struct PsxConfig *config,
                           struct PsxReport **out);

// Scores every candidate on `workers` threads and returns the ranked reports
// as a JSON array. Free the string with `psx_string_free`.
//
// # Safety
// `index` must be a live handle, `config` NULL or readable, and `out`
// writable.
enum PsxStatus psx_scan_json(const struct PsxIndex *index,
                             const struct PsxConfig *config,
                             size_t workers,
                             char **out);

// Releases a report. NULL is ignored.
//
// # Safety
// `report` must be NULL or a handle not yet freed.
void psx_report_free(struct PsxReport *report);

// # Safety
// `report` must be a live handle and `out` writable.
enum PsxStatus psx_report_index(const struct PsxReport *report, double *out);

// Number of relevant context terms that were embedded.
//
// # Safety
// `report` must be a live handle and `out` writable.
enum PsxStatus psx_report_n_w(const struct PsxReport *report, size_t *out);

// # Safety
// `report` must be a live handle and `out` writable.
enum PsxStatus psx_report_peak_count(const struct PsxReport *report, size_t *out);

// Peak `i`, strongest first.
//
// # Safety
// `report` must be a live handle and `out` writable.
enum PsxStatus psx_report_peak(const struct PsxReport *report, size_t i, struct PsxPeak *out);

// Borrows the smoothed radial profile. The array lives as long as the report.
//
// # Safety
// `report` must be a live handle; `data` and `len` must be writable.
enum PsxStatus psx_report_profile(const struct PsxReport *report, const double **data, size_t *len);

// The full report, seeds included, as a JSON object. Free the string with
// `psx_string_free`.
//
// # Safety
// `report` must be a live handle and `out` writable.
enum PsxStatus psx_report_json(const struct PsxReport *report, char **out);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must be NULL or a string from this library not yet freed.
void psx_string_free(char *s);

// Least-squares non-decreasing fit of `x`, written to `fitted` (length `n`).
// `sse` may be NULL.
//
// # Safety
// `x` and `fitted` must each hold `n` doubles.
enum PsxStatus psx_isotonic(const double *x, size_t n, double *fitted, double *sse);

// Best single-peaked fit of `x`: 1-based peak position and residual.
//
// # Safety
// `x` must hold `n` doubles; `peak` and `sse` must be writable.
enum PsxStatus psx_unimodal_fit(const double *x, size_t n, size_t *peak, double *sse);

// Polysemy index of a circular profile of `n` non-negative bins.
// `peak_bin` may be NULL.
//
// # Safety
// `profile` must hold `n` doubles; `index` must be writable.
enum PsxStatus psx_circular_index(const double *profile, size_t n, double *index, size_t *peak_bin);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYSEMY_H */
