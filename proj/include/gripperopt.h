/* gripperopt — co-optimization of parallel-jaw gripper surfaces and grasps
 * for sets of polygonal objects.
 *
 * C interface over the core library: opaque handles, integer status codes,
 * strings owned by the library and released with gripperopt_string_free().
 * All functions are thread-compatible; the error message buffer is
 * thread-local.
 */
#ifndef GRIPPEROPT_H
#define GRIPPEROPT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gripperopt_status {
  GRIPPEROPT_OK = 0,
  GRIPPEROPT_ERROR_IO = 1,
  GRIPPEROPT_ERROR_PARSE = 2,
  GRIPPEROPT_ERROR_VALIDATION = 3,
  GRIPPEROPT_ERROR_SCHEMA = 4,
  GRIPPEROPT_ERROR_NO_SOLUTION = 5,
  GRIPPEROPT_ERROR_INVALID_ARGUMENT = 6,
  GRIPPEROPT_ERROR_INTERNAL = 7
} gripperopt_status;

typedef struct gripperopt_problem gripperopt_problem;
typedef struct gripperopt_solution gripperopt_solution;

const char* gripperopt_version(void);
const char* gripperopt_status_name(gripperopt_status status);

/* Message describing the most recent failure on this thread. */
const char* gripperopt_last_error(void);

void gripperopt_string_free(char* s);

/* -- problems ------------------------------------------------------------ */

gripperopt_status gripperopt_problem_load(const char* path, gripperopt_problem** out);
gripperopt_status gripperopt_problem_parse(const char* text, gripperopt_problem** out);
void gripperopt_problem_free(gripperopt_problem* problem);

/* JSON: object/contact counts, parameter values, load warnings. */
gripperopt_status gripperopt_problem_summary(const gripperopt_problem* problem,
                                             char** out_json);

gripperopt_status gripperopt_problem_set_param(gripperopt_problem* problem, const char* name,
                                               double value);
gripperopt_status gripperopt_problem_get_param(const gripperopt_problem* problem,
                                               const char* name, double* out_value);

gripperopt_status gripperopt_problem_object_count(const gripperopt_problem* problem,
                                                  int* out_count);

/* Admissible gripper-orientation interval for one object, radians. */
gripperopt_status gripperopt_problem_theta_bounds(const gripperopt_problem* problem,
                                                  int object_index, double* out_low,
                                                  double* out_high);

/* -- solving ------------------------------------------------------------- */

typedef struct gripperopt_run_report {
  int candidates;
  int survivors;
  double best_objective; /* stability + shape objective of the top survivor */
  double total_seconds;
} gripperopt_run_report;

/* Runs the full pipeline and writes per-candidate solution files plus a
 * ranking manifest into out_dir.  Returns GRIPPEROPT_ERROR_NO_SOLUTION when
 * every candidate was discarded. */
gripperopt_status gripperopt_solve(const gripperopt_problem* problem, const char* out_dir,
                                   gripperopt_run_report* out_report);

/* -- solutions ----------------------------------------------------------- */

gripperopt_status gripperopt_solution_load(const char* path, gripperopt_solution** out);
void gripperopt_solution_free(gripperopt_solution* solution);

/* JSON: rank, objective breakdown, residuals, post-processing record. */
gripperopt_status gripperopt_solution_info(const gripperopt_solution* solution,
                                           char** out_json);

/* Render modes: "grasp", "gripper_frames", "sweep". */
gripperopt_status gripperopt_solution_render_count(const gripperopt_solution* solution,
                                                   const char* mode, int* out_count);
gripperopt_status gripperopt_solution_render(const gripperopt_solution* solution,
                                             const char* mode, int index, char** out_name,
                                             char** out_svg);

#ifdef __cplusplus
}
#endif

#endif /* GRIPPEROPT_H */
