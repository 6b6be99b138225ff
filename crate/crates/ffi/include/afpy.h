#ifndef AFPY_H
#define AFPY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AfpyStatus {
  AFPY_STATUS_OK = 0,
  AFPY_STATUS_NULL_POINTER = 1,
  AFPY_STATUS_INVALID_ARGUMENT = 2,
  AFPY_STATUS_SHAPE_MISMATCH = 3,
  AFPY_STATUS_IO = 4,
  AFPY_STATUS_FORMAT = 5,
  AFPY_STATUS_CAPACITY = 6,
  AFPY_STATUS_INTERNAL = 7,
  AFPY_STATUS_PANIC = 8,
} AfpyStatus;

typedef struct AfpyInstances AfpyInstances;

/**
 * Instance-id or class-id raster.
 */
typedef struct AfpyLabelMap AfpyLabelMap;

typedef struct AfpyPyramid AfpyPyramid;

/**
 * Per-pixel class probabilities, `classes x height x width`.
 */
typedef struct AfpyScores AfpyScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. Valid
 * until the next failing call on the same thread.
 */
const char *afpy_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *afpy_version(void);

/**
 * Copies a row-major `height x width` raster into a new label map.
 *
 * # Safety
 * `data` must point to `height * width` readable values; `out` must be
 * writable.
 */
enum AfpyStatus afpy_label_map_new(size_t height,
                                   size_t width,
                                   const uint32_t *data,
                                   struct AfpyLabelMap **out);

/**
 * # Safety
 * `map` must be a live handle; `height` and `width` must be writable.
 */
enum AfpyStatus afpy_label_map_dims(const struct AfpyLabelMap *map, size_t *height, size_t *width);

/**
 * Copies the raster into `out`, which must hold `len == height * width`
 * values.
 *
 * # Safety
 * `map` must be a live handle; `out` must point to `len` writable values.
 */
enum AfpyStatus afpy_label_map_read(const struct AfpyLabelMap *map, uint32_t *out, size_t len);

/**
 * # Safety
 * `map` must be null or a handle not yet freed.
 */
void afpy_label_map_free(struct AfpyLabelMap *map);

/**
 * Copies channel-major class scores.
 *
 * # Safety
 * `data` must point to `classes * height * width` readable values; `out`
 * must be writable.
 */
enum AfpyStatus afpy_scores_new(size_t classes,
                                size_t height,
                                size_t width,
                                const float *data,
                                struct AfpyScores **out);

/**
 * Scores with `confidence` on each pixel's class in `class_ids` and the
 * remainder spread evenly.
 *
 * # Safety
 * `class_ids` must be a live handle; `out` must be writable.
 */
enum AfpyStatus afpy_scores_from_classes(const struct AfpyLabelMap *class_ids,
                                         size_t classes,
                                         double confidence,
                                         struct AfpyScores **out);

/**
 * # Safety
 * `scores` must be null or a handle not yet freed.
 */
void afpy_scores_free(struct AfpyScores *scores);

/**
 * Generates a synthetic scene with default shape sizes and all shape
 * kinds.
 *
 * # Safety
 * `out_instances` and `out_classes` must be writable.
 */
enum AfpyStatus afpy_synth_scene(size_t height,
                                 size_t width,
                                 uint32_t num_instances,
                                 size_t class_count,
                                 bool occlusion,
                                 uint64_t seed,
                                 struct AfpyLabelMap **out_instances,
                                 struct AfpyLabelMap **out_classes);

/**
 * Ground-truth affinity pyramid with `levels` levels and an `r x r` window.
 *
 * # Safety
 * `instances` must be a live handle; `out` must be writable.
 */
enum AfpyStatus afpy_gt_pyramid(const struct AfpyLabelMap *instances,
                                size_t levels,
                                size_t r,
                                struct AfpyPyramid **out);

/**
 * Simulated prediction noise: label flips and logit-space Gaussian noise.
 *
 * # Safety
 * `pyramid` must be a live handle; `out` must be writable.
 */
enum AfpyStatus afpy_pyramid_perturb(const struct AfpyPyramid *pyramid,
                                     double flip_prob,
                                     double logistic_sigma,
                                     uint64_t seed,
                                     struct AfpyPyramid **out);

/**
 * # Safety
 * `pyramid` must be a live handle; `depth` must be writable.
 */
enum AfpyStatus afpy_pyramid_depth(const struct AfpyPyramid *pyramid, size_t *depth);

/**
 * # Safety
 * `pyramid` must be null or a handle not yet freed.
 */
void afpy_pyramid_free(struct AfpyPyramid *pyramid);

/**
 * Runs the full pipeline. `config_json` is a pipeline configuration
 * document or null for defaults.
 *
 * # Safety
 * Handles must be live; `config_json` must be null or NUL-terminated;
 * `out` must be writable.
 */
enum AfpyStatus afpy_segment(const struct AfpyPyramid *pyramid,
                             const struct AfpyScores *scores,
                             const char *config_json,
                             struct AfpyInstances **out);

/**
 * Ground-truth instances from instance and class id maps (score 1 each).
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum AfpyStatus afpy_instances_from_ground_truth(const struct AfpyLabelMap *instances,
                                                 const struct AfpyLabelMap *classes,
                                                 struct AfpyInstances **out);

/**
 * # Safety
 * `set` must be a live handle; `len` must be writable.
 */
enum AfpyStatus afpy_instances_len(const struct AfpyInstances *set, size_t *len);

/**
 * Instance map with ids 1, 2, ... in ranked order.
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum AfpyStatus afpy_instances_label_map(const struct AfpyInstances *set,
                                         struct AfpyLabelMap **out);

/**
 * JSON document with run-length encoded masks; free with
 * [`afpy_string_free`].
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum AfpyStatus afpy_instances_to_json(const struct AfpyInstances *set, char **out);

/**
 * # Safety
 * `set` must be null or a handle not yet freed.
 */
void afpy_instances_free(struct AfpyInstances *set);

/**
 * AP and PQ as a JSON document; free with [`afpy_string_free`].
 * `thing_classes` may be null (with `thing_len == 0`) to use every
 * ground-truth class.
 *
 * # Safety
 * Handles must be live; `thing_classes` must point to `thing_len` values;
 * `out` must be writable.
 */
enum AfpyStatus afpy_evaluate_json(const struct AfpyInstances *pred,
                                   const struct AfpyInstances *gt,
                                   const uint32_t *thing_classes,
                                   size_t thing_len,
                                   char **out);

/**
 * Greedy additive contraction (plus local search when requested) on a
 * weighted graph with `node_count` nodes and `edge_count` edges
 * `(us[k], vs[k], ws[k])`. Writes one label per node and the objective.
 *
 * # Safety
 * `us`, `vs`, `ws` must point to `edge_count` values; `labels` to
 * `node_count` writable values; `objective` must be null or writable.
 */
enum AfpyStatus afpy_multicut_solve(size_t node_count,
                                    size_t edge_count,
                                    const uint32_t *us,
                                    const uint32_t *vs,
                                    const double *ws,
                                    bool use_local_search,
                                    uint64_t seed,
                                    uint32_t *labels,
                                    double *objective);

/**
 * Binary PPM rendering; free with [`afpy_bytes_free`].
 *
 * # Safety
 * `map` must be a live handle; `out` and `out_len` must be writable.
 */
enum AfpyStatus afpy_render_ppm(const struct AfpyLabelMap *map,
                                uint64_t palette_seed,
                                uint8_t **out,
                                size_t *out_len);

/**
 * # Safety
 * `bytes` must be null or come from [`afpy_render_ppm`] with this `len`.
 */
void afpy_bytes_free(uint8_t *bytes, size_t len);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void afpy_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFPY_H */
