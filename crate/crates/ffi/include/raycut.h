#ifndef RAYCUT_H
#define RAYCUT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum RaycutStatus {
  RAYCUT_STATUS_OK = 0,
  RAYCUT_STATUS_NULL_POINTER = 1,
  RAYCUT_STATUS_INVALID_ARGUMENT = 2,
  RAYCUT_STATUS_IO = 3,
  RAYCUT_STATUS_FORMAT = 4,
  RAYCUT_STATUS_INFEASIBLE_CUT = 5,
  RAYCUT_STATUS_CONFLICTING_REFINEMENTS = 6,
  RAYCUT_STATUS_BUFFER_TOO_SMALL = 7,
  RAYCUT_STATUS_PANIC = 8,
} RaycutStatus;

/**
 * Opaque scalar image handle.
 */
typedef struct RaycutGrid RaycutGrid;

/**
 * Opaque segmentation result handle.
 */
typedef struct RaycutResult RaycutResult;

/**
 * Lattice and cost-model parameters. `lat_rows == 0` picks the default
 * latitude row count for 3D templates.
 */
typedef struct RaycutConfig {
  size_t delta;
  size_t rays;
  size_t nodes_per_ray;
  size_t lat_rows;
  double mean_radius_mm;
  bool include_refinement_in_mean;
} RaycutConfig;

/**
 * Per-phase wall-clock time of one segmentation, milliseconds.
 */
typedef struct RaycutTiming {
  double ray_generation_ms;
  double sampling_ms;
  double assembly_ms;
  double solve_ms;
  double extraction_ms;
  double total_ms;
} RaycutTiming;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *raycut_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into the library from the same thread.
 */
const char *raycut_last_error(void);

/**
 * Default parameters: 30 rays, 30 nodes per ray, delta 2, 5 mm mean radius.
 */
struct RaycutConfig raycut_config_default(void);

/**
 * Creates a grid from `ndim` (2 or 3) dimensions and x-fastest voxel values.
 * `spacing` and `origin` may be NULL for unit spacing and zero origin.
 *
 * # Safety
 * `dims` must hold `ndim` elements, `spacing`/`origin` `ndim` elements when
 * non-NULL, and `values` the product of `dims`.
 */
enum RaycutStatus raycut_grid_new(size_t ndim,
                                  const size_t *dims,
                                  const double *spacing,
                                  const double *origin,
                                  const double *values,
                                  struct RaycutGrid **out);

/**
 * Loads a grid from a file; the format is chosen by extension.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RaycutStatus raycut_grid_load(const char *path, struct RaycutGrid **out);

/**
 * # Safety
 * `grid` must come from `raycut_grid_new`/`raycut_grid_load` or be NULL.
 */
void raycut_grid_free(struct RaycutGrid *grid);

/**
 * Number of dimensions of the grid, 0 for NULL.
 *
 * # Safety
 * `grid` must be a live handle or NULL.
 */
size_t raycut_grid_ndim(const struct RaycutGrid *grid);

/**
 * Writes the grid dimensions into `dims` (capacity `len`).
 *
 * # Safety
 * `grid` must be a live handle and `dims` hold `len` elements.
 */
enum RaycutStatus raycut_grid_dims(const struct RaycutGrid *grid, size_t *dims, size_t len);

/**
 * Segments `grid` from a primary seed (world coordinates, mm) and
 * `refinement_count` refinement seeds stored back to back in `refinements`.
 * Each point has as many coordinates as the grid has dimensions.
 * `template_spec` uses the command-line syntax, e.g. `circle:60`,
 * `rectangle:40x30`, `sphere:50`. `config` may be NULL for the defaults.
 *
 * # Safety
 * Pointers must be valid for the sizes described above.
 */
enum RaycutStatus raycut_segment(const struct RaycutGrid *grid,
                                 const char *template_spec,
                                 const double *seed,
                                 const double *refinements,
                                 size_t refinement_count,
                                 const struct RaycutConfig *config,
                                 struct RaycutResult **out);

/**
 * # Safety
 * `result` must come from `raycut_segment` or be NULL.
 */
void raycut_result_free(struct RaycutResult *result);

/**
 * Number of rays, which is also the length of the boundary vector.
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
size_t raycut_result_ray_count(const struct RaycutResult *result);

/**
 * Copies the boundary depth of every ray into `out`.
 *
 * # Safety
 * `result` must be a live handle and `out` hold `len` elements.
 */
enum RaycutStatus raycut_result_boundary(const struct RaycutResult *result,
                                         size_t *out,
                                         size_t len);

/**
 * Value of the maximum flow (equal to the minimum cut capacity).
 *
 * # Safety
 * `result` must be a live handle or NULL (NaN is returned for NULL).
 */
double raycut_result_flow_value(const struct RaycutResult *result);

/**
 * Seed-region mean intensity used by the cost model.
 *
 * # Safety
 * `result` must be a live handle or NULL (NaN is returned for NULL).
 */
double raycut_result_mean(const struct RaycutResult *result);

/**
 * # Safety
 * `result` and `out` must be valid pointers.
 */
enum RaycutStatus raycut_result_timing(const struct RaycutResult *result, struct RaycutTiming *out);

/**
 * Number of voxels in the result mask (same as the input grid).
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
size_t raycut_result_mask_len(const struct RaycutResult *result);

/**
 * Copies the mask as 0/1 bytes in x-fastest order.
 *
 * # Safety
 * `result` must be a live handle and `out` hold `len` bytes.
 */
enum RaycutStatus raycut_result_mask(const struct RaycutResult *result, uint8_t *out, size_t len);

/**
 * Number of contour vertices. In 3D this includes the two pole points.
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
size_t raycut_result_vertex_count(const struct RaycutResult *result);

/**
 * Copies contour vertices as x,y,z triples (mm); `len` counts doubles.
 *
 * # Safety
 * `result` must be a live handle and `out` hold `len` doubles.
 */
enum RaycutStatus raycut_result_vertices(const struct RaycutResult *result,
                                         double *out,
                                         size_t len);

/**
 * Number of surface triangles, 0 for 2D results.
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
size_t raycut_result_triangle_count(const struct RaycutResult *result);

/**
 * Copies triangle vertex indices as triples; `len` counts indices.
 *
 * # Safety
 * `result` must be a live handle and `out` hold `len` elements.
 */
enum RaycutStatus raycut_result_triangles(const struct RaycutResult *result,
                                          size_t *out,
                                          size_t len);

/**
 * JSON rendering of the result. Release with `raycut_string_free`.
 *
 * # Safety
 * `result` and `out` must be valid pointers.
 */
enum RaycutStatus raycut_result_to_json(const struct RaycutResult *result, char **out);

/**
 * # Safety
 * `s` must come from this library or be NULL.
 */
void raycut_string_free(char *s);

/**
 * Dice overlap of two label arrays of `len` bytes (nonzero = foreground).
 * Two all-background masks score 1; `len` must be positive.
 *
 * # Safety
 * `a` and `b` must hold `len` bytes and `out` be valid.
 */
enum RaycutStatus raycut_dice(const uint8_t *a, const uint8_t *b, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAYCUT_H */
