#ifndef OPENAREA_H
#define OPENAREA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  OA_STATUS_OK = 0,
  OA_STATUS_NULL_ARGUMENT = 1,
  OA_STATUS_INVALID_INPUT = 2,
  OA_STATUS_NO_PATH = 3,
  OA_STATUS_INTERNAL = 4,
} OaStatus;

typedef enum {
  OA_ALGORITHM_FULL = 0,
  OA_ALGORITHM_HIERARCHICAL = 1,
} OaAlgorithm;

/**
 * Link-cost model.
 */
typedef struct OaCostModel OaCostModel;

/**
 * A computed route.
 */
typedef struct OaRoute OaRoute;

/**
 * A loaded scene.
 */
typedef struct OaScene OaScene;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next `oa_*` call on the same thread.
 */
const char *oa_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *oa_version(void);

/**
 * Parses a GeoJSON scene document.
 *
 * # Safety
 * `geojson` must be a NUL-terminated string and `out` a valid pointer.
 */
OaStatus oa_scene_load_geojson(const char *geojson, OaScene **out);

/**
 * # Safety
 * `scene` must come from [`oa_scene_load_geojson`] or be null.
 */
void oa_scene_free(OaScene *scene);

/**
 * Number of walkable areas in the scene, 0 for null.
 *
 * # Safety
 * `scene` must be a live handle or null.
 */
size_t oa_scene_area_count(const OaScene *scene);

/**
 * The default cost model.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
OaStatus oa_cost_model_default(OaCostModel **out);

/**
 * Parses a cost configuration; `is_toml` selects TOML over JSON.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` a valid pointer.
 */
OaStatus oa_cost_model_parse(const char *config, bool is_toml, OaCostModel **out);

/**
 * # Safety
 * `model` must come from an `oa_cost_model_*` constructor or be null.
 */
void oa_cost_model_free(OaCostModel *model);

/**
 * Routes from `(sx, sy)` to `(tx, ty)` in scene coordinates. A null
 * `model` uses the default cost model.
 *
 * # Safety
 * `scene` must be a live handle, `model` live or null, `out` valid.
 */
OaStatus oa_route(const OaScene *scene,
                  const OaCostModel *model,
                  double sx,
                  double sy,
                  double tx,
                  double ty,
                  OaAlgorithm algorithm,
                  OaRoute **out);

/**
 * # Safety
 * `route` must come from [`oa_route`] or be null.
 */
void oa_route_free(OaRoute *route);

/**
 * Total weighted cost, NaN for null.
 *
 * # Safety
 * `route` must be a live handle or null.
 */
double oa_route_cost(const OaRoute *route);

/**
 * Total length in meters, NaN for null.
 *
 * # Safety
 * `route` must be a live handle or null.
 */
double oa_route_length(const OaRoute *route);

/**
 * Number of polyline vertices, 0 for null.
 *
 * # Safety
 * `route` must be a live handle or null.
 */
size_t oa_route_point_count(const OaRoute *route);

/**
 * Copies up to `capacity` vertices into `xy` (2 doubles each) and returns
 * how many were written.
 *
 * # Safety
 * `xy` must have room for `2 * capacity` doubles.
 */
size_t oa_route_points(const OaRoute *route, double *xy, size_t capacity);

/**
 * The route as a GeoJSON string; release with [`oa_string_free`]. Null on
 * failure.
 *
 * # Safety
 * `route` must be a live handle or null.
 */
char *oa_route_to_geojson(const OaRoute *route);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void oa_string_free(char *s);

/**
 * Closest-pair distance between two point sequences.
 *
 * # Safety
 * `a` and `b` must hold `2 * na` and `2 * nb` doubles; `out` must be valid.
 */
OaStatus oa_cpd(const double *a, size_t na, const double *b, size_t nb, double *out);

/**
 * LCSS distance with matching threshold `eps`.
 *
 * # Safety
 * As for [`oa_cpd`].
 */
OaStatus oa_lcss_distance(const double *a,
                          size_t na,
                          const double *b,
                          size_t nb,
                          double eps,
                          double *out);

/**
 * Directed segment-wise Hausdorff distance of two polylines sharing
 * endpoints within `tol`.
 *
 * # Safety
 * As for [`oa_cpd`].
 */
OaStatus oa_dhaus(const double *a,
                  size_t na,
                  const double *b,
                  size_t nb,
                  double w1,
                  double w2,
                  double tol,
                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPENAREA_H */
