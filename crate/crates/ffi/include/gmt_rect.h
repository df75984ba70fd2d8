#ifndef GMT_RECT_H
#define GMT_RECT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum GmtStatus {
  GMT_STATUS_OK = 0,
  GMT_STATUS_NULL_POINTER = 1,
  GMT_STATUS_INVALID_ARGUMENT = 2,
  GMT_STATUS_INVALID_LANDMARK = 3,
  GMT_STATUS_INCONSISTENT_DATA = 4,
  GMT_STATUS_INSUFFICIENT_DENSITY = 5,
  GMT_STATUS_UNSUPPORTED_DOMAIN = 6,
  GMT_STATUS_UNRELIABLE_CHECK = 7,
  GMT_STATUS_NEEDS_PERMUTATION = 8,
  GMT_STATUS_STRAIGHTENING_FAILED = 9,
  GMT_STATUS_CUBE_TOO_COARSE = 10,
  GMT_STATUS_NOT_HORIZONTAL = 11,
  GMT_STATUS_NO_PATH_FOUND = 12,
  GMT_STATUS_DEGENERATE_SYSTEM = 13,
  GMT_STATUS_UNKNOWN_EXPERIMENT = 14,
  GMT_STATUS_EMPTY_REPORT = 15,
  GMT_STATUS_CONFIG = 16,
  GMT_STATUS_IO = 17,
  GMT_STATUS_PARSE = 18,
  GMT_STATUS_PANIC = 99,
} GmtStatus;

/**
 * Target metric of a sampled map.
 */
typedef enum GmtTarget {
  GMT_TARGET_EUCLIDEAN = 0,
  GMT_TARGET_LINF = 1,
  GMT_TARGET_HEISENBERG = 2,
} GmtTarget;

/**
 * The report of one experiment run.
 */
typedef struct GmtReport GmtReport;

/**
 * A map sampled on an `h`-grid.
 */
typedef struct GmtSampledMap GmtSampledMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *gmt_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void gmt_string_free(char *s);

/**
 * Korányi distance between two points of `H^n`, each given as `2n + 1`
 * coordinates `(x_1..x_n, y_1..y_n, t)`.
 *
 * # Safety
 * `p` and `q` must point to `2n + 1` doubles; `out` must be writable.
 */
enum GmtStatus gmt_koranyi_distance(const double *p, const double *q, uintptr_t n, double *out);

/**
 * Greedy-cover estimate of the `s`-dimensional content of `count` points
 * of dimension `dim` stored row by row.
 *
 * # Safety
 * `points` must hold `count * dim` doubles; `value` and `balls` must be
 * writable.
 */
enum GmtStatus gmt_hausdorff_content(const double *points,
                                     uintptr_t count,
                                     uintptr_t dim,
                                     enum GmtTarget target,
                                     double s,
                                     double r,
                                     double *value,
                                     uintptr_t *balls);

/**
 * Builds a sampled map from `count` grid indices (`k` integers each, row by
 * row) and values (`target_dim` doubles each). Domain point `i` is
 * `indices[i] * h`.
 *
 * # Safety
 * The arrays must have the stated lengths; `out` must be writable.
 */
enum GmtStatus gmt_sampled_map_new(uintptr_t k,
                                   double h,
                                   const int64_t *indices,
                                   const double *values,
                                   uintptr_t count,
                                   uintptr_t target_dim,
                                   enum GmtTarget target,
                                   struct GmtSampledMap **out);

/**
 * # Safety
 * `map` must be null or a handle from [`gmt_sampled_map_new`], not yet freed.
 */
void gmt_sampled_map_free(struct GmtSampledMap *map);

/**
 * Number of grid points and the grid Lipschitz estimate.
 *
 * # Safety
 * `map` must be a live handle; `len` and `lipschitz` must be writable.
 */
enum GmtStatus gmt_sampled_map_info(const struct GmtSampledMap *map,
                                    uintptr_t *len,
                                    double *lipschitz);

/**
 * Writes the resolved jet rank of every grid point to `ranks` (`-1` for
 * unresolved points), using relative singular value cutoff `tol`.
 *
 * # Safety
 * `map` must be a live handle; `ranks` must hold as many entries as the
 * map has points.
 */
enum GmtStatus gmt_stratify(const struct GmtSampledMap *map, double tol, int32_t *ranks);

/**
 * Number of registered experiments.
 */
uintptr_t gmt_experiment_count(void);

/**
 * Id of experiment `i` as a static string, or null when out of range.
 */
const char *gmt_experiment_id(uintptr_t i);

/**
 * Runs experiment `id`. `config_toml` may be null (shipped parameters);
 * `seed` overrides the configured seed when `use_seed` is true.
 *
 * # Safety
 * `id` must be a NUL-terminated string, `config_toml` null or one; `out`
 * must be writable.
 */
enum GmtStatus gmt_run_experiment(const char *id,
                                  const char *config_toml,
                                  bool use_seed,
                                  uint64_t seed,
                                  struct GmtReport **out);

/**
 * # Safety
 * `report` must be null or a handle from [`gmt_run_experiment`], not yet
 * freed.
 */
void gmt_report_free(struct GmtReport *report);

/**
 * Whether every verdict of the report passed.
 *
 * # Safety
 * `report` must be a live handle; `passed` must be writable.
 */
enum GmtStatus gmt_report_passed(const struct GmtReport *report, bool *passed);

/**
 * The report as JSON; release with [`gmt_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `json` must be writable.
 */
enum GmtStatus gmt_report_json(const struct GmtReport *report, char **json);

/**
 * Writes `report.json`, `metrics.csv`, the side tables and `manifest.json`
 * into `dir`.
 *
 * # Safety
 * `report` must be a live handle and `dir` a NUL-terminated path.
 */
enum GmtStatus gmt_report_write(const struct GmtReport *report, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GMT_RECT_H */
