/* C interface to the npbrake library: nonplanar road geometry, predictive
 * speed planning and closed-loop braking simulation.
 *
 * Objects are opaque handles created by *_from_file / *_from_json and
 * released with the matching *_free. Every fallible call returns an
 * npb_status; on failure npb_last_error() describes the problem (the text is
 * per thread and valid until the next failing call on that thread). */
#ifndef NPBRAKE_NPBRAKE_H_
#define NPBRAKE_NPBRAKE_H_

#include <stddef.h>

#if defined(_WIN32)
#define NPB_API __declspec(dllexport)
#else
#define NPB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum npb_status {
  NPB_OK = 0,
  NPB_ERR_CONFIG = 1,           /* malformed or invalid configuration */
  NPB_ERR_INFEASIBLE = 2,       /* no admissible speed profile */
  NPB_ERR_SOLVER = 3,           /* solver failed (iteration limit, numerics) */
  NPB_ERR_SCENARIO = 4,         /* run left the road or diverged */
  NPB_ERR_DOMAIN = 5,           /* query outside the road surface */
  NPB_ERR_DEGENERATE = 6,       /* surface or offset is singular */
  NPB_ERR_INVALID_ARGUMENT = 7, /* null pointer or out-of-range argument */
  NPB_ERR_IO = 8,               /* file could not be read or written */
  NPB_ERR_INTERNAL = 9
} npb_status;

typedef struct npb_road npb_road;
typedef struct npb_vehicle npb_vehicle;
typedef struct npb_scenario npb_scenario;
typedef struct npb_profile npb_profile;
typedef struct npb_run npb_run;

typedef struct npb_options {
  int paper_literal;      /* printed load-transfer and continuity forms */
  int theta_rate_variant; /* 0: symmetric (x_sy), 1: printed (x_yy) */
  int planar_model;       /* plan with the second fundamental form zeroed */
} npb_options;

NPB_API void npb_options_default(npb_options* options);

NPB_API const char* npb_version(void);
NPB_API const char* npb_status_string(npb_status status);
NPB_API const char* npb_last_error(void);
NPB_API void npb_string_free(char* text);

/* Roads. */
NPB_API npb_status npb_road_from_file(const char* path, npb_road** out);
NPB_API npb_status npb_road_from_json(const char* json, npb_road** out);
NPB_API void npb_road_free(npb_road* road);
NPB_API npb_status npb_road_extent(const npb_road* road, double* s_max, double* half_width);

typedef struct npb_surface_check {
  double max_error;
  double worst_s;
  double worst_y;
  int points;
  char worst_quantity[32];
} npb_surface_check;

/* Finite-difference check of all analytic partials on an ns x ny grid. */
NPB_API npb_status npb_check_surface(const npb_road* road, int ns, int ny,
                                     npb_surface_check* out);

/* Vehicles. */
NPB_API npb_status npb_vehicle_from_file(const char* path, npb_vehicle** out);
NPB_API npb_status npb_vehicle_from_json(const char* json, npb_vehicle** out);
NPB_API void npb_vehicle_free(npb_vehicle* vehicle);

/* Scenarios. Relative road/vehicle references resolve against the file's
 * directory (or base_dir for from_json, which may be NULL). */
NPB_API npb_status npb_scenario_from_file(const char* path, npb_scenario** out);
NPB_API npb_status npb_scenario_from_json(const char* json, const char* base_dir,
                                          npb_scenario** out);
NPB_API void npb_scenario_free(npb_scenario* scenario);
/* Referenced road/vehicle paths, or NULL when the scenario names none. */
NPB_API const char* npb_scenario_road_path(const npb_scenario* scenario);
NPB_API const char* npb_scenario_vehicle_path(const npb_scenario* scenario);
NPB_API const char* npb_scenario_mode(const npb_scenario* scenario);

/* Planning. On NPB_ERR_INFEASIBLE a profile is still returned carrying the
 * first violated stage; it has no stage rows. options may be NULL. */
NPB_API npb_status npb_plan(const npb_road* road, const npb_vehicle* vehicle,
                            const npb_scenario* scenario, const npb_options* options,
                            npb_profile** out);
NPB_API void npb_profile_free(npb_profile* profile);

typedef struct npb_stage_result {
  int k;
  double s, l, v2, vdot;
  double ft1, ft2, ft3;
  double margin;
  double friction_util;
  double normals[4]; /* fr, fl, rr, rl */
  int flag;
} npb_stage_result;

NPB_API const char* npb_profile_status(const npb_profile* profile);
NPB_API size_t npb_profile_num_stages(const npb_profile* profile);
NPB_API npb_status npb_profile_stage(const npb_profile* profile, size_t k,
                                     npb_stage_result* out);
NPB_API double npb_profile_objective(const npb_profile* profile);
NPB_API double npb_profile_continuity_residual(const npb_profile* profile);
NPB_API int npb_profile_first_infeasible_stage(const npb_profile* profile);
/* JSON summary; free with npb_string_free. */
NPB_API npb_status npb_profile_summary_json(const npb_profile* profile, char** out);
NPB_API npb_status npb_profile_write_csv(const npb_profile* profile, const char* path,
                                         int include_meta);

/* Simulation. mode NULL uses the scenario's mode. A run that leaves the road
 * still returns NPB_OK; the summary tells. */
NPB_API npb_status npb_simulate(const npb_road* road, const npb_vehicle* vehicle,
                                const npb_scenario* scenario, const char* mode,
                                const npb_options* options, npb_run** out);
NPB_API void npb_run_free(npb_run* run);

typedef struct npb_run_summary {
  int completed;
  char reason[16];
  double max_abs_y;
  double max_friction_util;
  double min_wheel_load;
  double t_end, s_end, v_end;
  int plans;
  int infeasible_plans;
  int expectation_met; /* compared with the scenario's expected outcome */
} npb_run_summary;

typedef struct npb_log_record {
  double t, s, y, theta_s, v, beta, delta;
  double normals[4];
  double normals_est[4];
  double brake[4];
  double friction_util;
  double a_proper[3];
  double margin;
  double driver_brake;
  int flags;
} npb_log_record;

NPB_API npb_status npb_run_summary_get(const npb_run* run, npb_run_summary* out);
NPB_API size_t npb_run_num_records(const npb_run* run);
NPB_API npb_status npb_run_record(const npb_run* run, size_t i, npb_log_record* out);
NPB_API npb_status npb_run_summary_json(const npb_run* run, char** out);
NPB_API npb_status npb_run_write_csv(const npb_run* run, const char* path, int include_meta);

/* Standalone conic solve: program JSON in, solution JSON out (free with
 * npb_string_free). Returns the solve outcome as a status. */
NPB_API npb_status npb_solve_conic_json(const char* program_json, char** solution_json);

#ifdef __cplusplus
}
#endif

#endif /* NPBRAKE_NPBRAKE_H_ */
