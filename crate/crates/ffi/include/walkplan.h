#ifndef WALKPLAN_H
#define WALKPLAN_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WpStatus {
  WP_STATUS_OK = 0,
  WP_STATUS_NULL_POINTER = 1,
  WP_STATUS_INVALID_ARGUMENT = 2,
  WP_STATUS_OUT_OF_BOUNDS = 3,
  WP_STATUS_PARSE = 4,
  WP_STATUS_INVALID_START = 5,
  WP_STATUS_INVALID_GOAL = 6,
  WP_STATUS_TIMEOUT = 7,
  WP_STATUS_NO_PATH = 8,
  WP_STATUS_PLANNER = 9,
  WP_STATUS_PANIC = 10,
} WpStatus;

/**
 * Elevation map handle.
 */
typedef struct WpMap WpMap;

/**
 * Planned path handle.
 */
typedef struct WpPath WpPath;

/**
 * Robot model handle.
 */
typedef struct WpRobot WpRobot;

/**
 * Planner settings; obtain defaults from `wp_planner_config_default`.
 */
typedef struct WpPlannerConfig {
  double opt_time;
  double time_limit;
  uint64_t seed;
  double d_rrt;
  uint32_t n_rewire;
  double goal_tolerance;
  /**
   * Measure budgets in wall-clock seconds instead of deterministic work.
   */
  bool wall_clock;
} WpPlannerConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread. Valid until the
 * next failing call on the same thread; never null.
 */
const char *wp_last_error(void);

/**
 * Static name of a status code.
 */
const char *wp_status_name(enum WpStatus status);

/**
 * Builds a benchmark scenario map (`flat`, `rough`, `box`, `bugtrap`).
 *
 * # Safety
 * `kind` must be a NUL-terminated string; `out` must be writable.
 */
enum WpStatus wp_map_scenario(const char *kind, uint64_t seed, struct WpMap **out);

/**
 * Parses a map in the text format written by `bench run`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum WpStatus wp_map_load(const char *text, struct WpMap **out);

/**
 * # Safety
 * `map` must come from `wp_map_*` and not be used afterwards. Null is a no-op.
 */
void wp_map_free(struct WpMap *map);

/**
 * Interpolated terrain height at `(x, y)`.
 *
 * # Safety
 * `map` must be a live handle; `out` must be writable.
 */
enum WpStatus wp_map_height_at(const struct WpMap *map, double x, double y, double *out);

/**
 * Robot model by name (`hexapod` or `quadruped`).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum WpStatus wp_robot_new(const char *name, struct WpRobot **out);

/**
 * # Safety
 * `robot` must come from `wp_robot_new` and not be used afterwards.
 */
void wp_robot_free(struct WpRobot *robot);

struct WpPlannerConfig wp_planner_config_default(void);

/**
 * Plans from a standing pose at `(start_x, start_y, start_yaw)` to the
 * point `(goal_x, goal_y)`. `planner` is one of `rrtconnect`,
 * `guidedrrt`, `rrtstarconnect`, `irrtstarconnect`, `igrsc`.
 *
 * # Safety
 * `map` and `robot` must be live handles, `planner` a NUL-terminated
 * string, `cfg` null (defaults) or readable, and `out` writable.
 */
enum WpStatus wp_plan(const struct WpMap *map,
                      const struct WpRobot *robot,
                      const char *planner,
                      double start_x,
                      double start_y,
                      double start_yaw,
                      double goal_x,
                      double goal_y,
                      const struct WpPlannerConfig *cfg,
                      struct WpPath **out);

/**
 * # Safety
 * `path` must come from `wp_plan` and not be used afterwards.
 */
void wp_path_free(struct WpPath *path);

/**
 * Number of states in the path; 0 for null.
 *
 * # Safety
 * `path` must be null or a live handle.
 */
size_t wp_path_state_count(const struct WpPath *path);

/**
 * Horizontal body path length in meters; NaN for null.
 *
 * # Safety
 * `path` must be null or a live handle.
 */
double wp_path_length(const struct WpPath *path);

/**
 * Length of the first path found, before any optimization; NaN for null.
 *
 * # Safety
 * `path` must be null or a live handle.
 */
double wp_path_initial_length(const struct WpPath *path);

/**
 * Body position of state `index` written to `xyz[0..3]`.
 *
 * # Safety
 * `path` must be a live handle and `xyz` must hold 3 doubles.
 */
enum WpStatus wp_path_body_position(const struct WpPath *path, size_t index, double *xyz);

/**
 * Path as a JSON document. Free the string with `wp_string_free`.
 *
 * # Safety
 * `path` must be a live handle, `scenario` null or a NUL-terminated
 * string, and `out` writable.
 */
enum WpStatus wp_path_to_json(const struct WpPath *path,
                              const char *scenario,
                              uint64_t seed,
                              char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void wp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WALKPLAN_H */
