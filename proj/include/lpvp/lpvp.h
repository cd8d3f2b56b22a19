/* C interface to the gain-scheduled preview steering library.
 *
 * Every function returns an lpvp_status. On failure the thread's last error
 * message is available through lpvp_last_error() until the next call on the
 * same thread. Strings returned through char** are owned by the caller and
 * released with lpvp_string_free(). */
#ifndef LPVP_LPVP_H_
#define LPVP_LPVP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LPVP_EXPORT __declspec(dllexport)
#else
#define LPVP_EXPORT __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  LPVP_OK = 0,
  LPVP_ERROR = 1,          /* numerical, I/O, or simulation failure */
  LPVP_CONFIG = 2,         /* malformed config, schedule, or argument */
  LPVP_INFEASIBLE = 3,     /* synthesis LMIs infeasible */
  LPVP_VERIFICATION = 4,   /* post-hoc checks failed */
} lpvp_status;

typedef struct lpvp_config lpvp_config;
typedef struct lpvp_schedule lpvp_schedule;

typedef struct {
  double max_abs_error;
  double steady_state_error;
  double rms_error;
  double max_abs_steer;
  double max_abs_yaw_rate;
} lpvp_trace_summary;

LPVP_EXPORT const char* lpvp_version(void);
LPVP_EXPORT const char* lpvp_last_error(void);
LPVP_EXPORT void lpvp_string_free(char* text);

/* Configuration. Files must name every vehicle parameter; documents passed
 * to lpvp_config_parse fill gaps from the defaults. */
LPVP_EXPORT lpvp_status lpvp_config_default(lpvp_config** out);
LPVP_EXPORT lpvp_status lpvp_config_load(const char* path, lpvp_config** out);
LPVP_EXPORT lpvp_status lpvp_config_parse(const char* json, lpvp_config** out);
/* "dotted.key=value"; the value is JSON, or a bare string. */
LPVP_EXPORT lpvp_status lpvp_config_set(lpvp_config* config,
                                        const char* assignment);
LPVP_EXPORT lpvp_status lpvp_config_to_json(const lpvp_config* config,
                                            char** out);
LPVP_EXPORT void lpvp_config_free(lpvp_config* config);

/* Schedules. */
LPVP_EXPORT lpvp_status lpvp_schedule_load(const char* path,
                                           lpvp_schedule** out);
LPVP_EXPORT lpvp_status lpvp_schedule_parse(const char* json,
                                            lpvp_schedule** out);
LPVP_EXPORT lpvp_status lpvp_schedule_save(const lpvp_schedule* schedule,
                                           const char* path);
LPVP_EXPORT lpvp_status lpvp_schedule_to_json(const lpvp_schedule* schedule,
                                              char** out);
LPVP_EXPORT void lpvp_schedule_free(lpvp_schedule* schedule);
LPVP_EXPORT lpvp_status lpvp_schedule_dims(const lpvp_schedule* schedule,
                                           int* n_v, int* n_r);
/* Writes the n_v + n_r gains of u = -K x at speed vx into K. */
LPVP_EXPORT lpvp_status lpvp_schedule_gains(const lpvp_schedule* schedule,
                                            double vx, double* K,
                                            size_t length);
/* Squared norm bound; LPVP_CONFIG when the schedule carries none. */
LPVP_EXPORT lpvp_status lpvp_schedule_mu(const lpvp_schedule* schedule,
                                         double* mu);

/* In-memory H-infinity (or LQ, per synthesis.method) synthesis on the
 * nominal (uncertain = 0) or stiffness-corner family. */
LPVP_EXPORT lpvp_status lpvp_synthesize(const lpvp_config* config,
                                        int uncertain, lpvp_schedule** out,
                                        char** report);

/* Commands. A NULL out_dir uses the configured output directory; `text`
 * may be NULL. The status doubles as the command's exit code. */
LPVP_EXPORT lpvp_status lpvp_model_dump(const lpvp_config* config,
                                        char** text);
LPVP_EXPORT lpvp_status lpvp_synth(const lpvp_config* config,
                                   const char* out_dir, char** text);
LPVP_EXPORT lpvp_status lpvp_check(const lpvp_schedule* schedule,
                                   const lpvp_config* config,
                                   const char* out_dir, char** text);
LPVP_EXPORT lpvp_status lpvp_simulate(const lpvp_schedule* schedule,
                                      const lpvp_config* config,
                                      const char* out_dir, char** text);
LPVP_EXPORT lpvp_status lpvp_export(const lpvp_schedule* schedule,
                                    const lpvp_config* config,
                                    const char* out_dir, char** text);

/* Summary statistics of a trace CSV written by lpvp_simulate. */
LPVP_EXPORT lpvp_status lpvp_trace_summary_load(const char* csv_path,
                                                lpvp_trace_summary* out);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // LPVP_LPVP_H_
