#ifndef SOLESENSE_H
#define SOLESENSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(SOLESENSE_BUILDING)
#define SS_API __attribute__((visibility("default")))
#else
#define SS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ss_status {
  SS_OK = 0,
  SS_ERR_USAGE = 1,
  SS_ERR_DOMAIN = 2,
  SS_ERR_RANGE = 3,
  SS_ERR_ORDERING = 4,
  SS_ERR_PARSE = 5,
  SS_ERR_FIT = 6,
  SS_ERR_CONFIG = 7,
  SS_ERR_CODEC = 8,
  SS_ERR_IO = 9,
  SS_ERR_NETWORK = 10,
  SS_ERR_INTERNAL = 11
} ss_status;

/* Message for the last failing call on this thread; "" when none. */
SS_API const char* ss_last_error(void);
SS_API const char* ss_status_name(ss_status status);
/* Process exit code: 0 ok, 1 usage, 2 data/validation, 3 I/O, 4 network. */
SS_API int ss_status_exit_code(ss_status status);
/* Frees strings returned through char** out-parameters. */
SS_API void ss_string_free(char* s);
SS_API const char* ss_version(void);

#define SS_CHANNELS 5

typedef struct ss_divider {
  double v_in;
  double r1_ohm;
  int adc_bits;
  double v_ref;
  double battery_v;
} ss_divider;

SS_API void ss_divider_default(ss_divider* out);

typedef struct ss_gait_params {
  double mass_kg;
  double cadence_spm;
  double stance_fraction;
  double sample_rate_hz;
  uint32_t cycles;
  double noise_sigma_pa;
  uint64_t seed;
  double load_scale;
} ss_gait_params;

SS_API void ss_gait_params_default(ss_gait_params* out);

/* ---- calibration profiles ---- */

typedef struct ss_profile ss_profile;

/* Built-in name, .json profile, or pressure_pa,resistance_ohm CSV. */
SS_API ss_status ss_profile_load(const char* name_or_path, ss_profile** out);
/* onset_pa <= 0 selects min(200 kPa, lowest calibration pressure). */
SS_API ss_status ss_profile_fit_csv(const char* csv_path, const char* name, double onset_pa,
                                    ss_profile** out);
SS_API void ss_profile_free(ss_profile* profile);
/* +inf when the sensor reads open circuit. */
SS_API ss_status ss_profile_static_resistance(const ss_profile* profile, double pressure_pa,
                                              double* ohms);
SS_API ss_status ss_profile_pressure_for(const ss_profile* profile, double ohms, double* pressure_pa);
SS_API ss_status ss_profile_to_json(const ss_profile* profile, char** json);
SS_API ss_status ss_profile_save(const ss_profile* profile, const char* path);
SS_API ss_status ss_profile_characterize(const ss_profile* profile, char** json);
/* "<R> Ω @ <P> kPa … <R> Ω @ <P> kPa" */
SS_API ss_status ss_profile_range_report(const ss_profile* profile, char** text);
/* Newline-separated built-in profile names. */
SS_API ss_status ss_profile_builtin_names(char** names);

/* ---- sessions ---- */

/* epoch may be NULL (1970-01-01T00:00:00Z); divider may be NULL (defaults). */
SS_API ss_status ss_simulate(const ss_gait_params* params, const char* profile,
                             const ss_divider* divider, uint8_t device_id, const char* epoch,
                             const char* out_path);
/* Sample count of a session file. */
SS_API ss_status ss_session_count(const char* path, size_t* samples);

/* ---- analysis ---- */

typedef struct ss_analyzer ss_analyzer;

SS_API ss_status ss_analyzer_new(ss_analyzer** out);
SS_API void ss_analyzer_free(ss_analyzer* analyzer);
/* Timestamps must strictly increase. events (nullable) receives the number of gait events. */
SS_API ss_status ss_analyzer_push(ss_analyzer* analyzer, double t_s,
                                  const double pressures_pa[SS_CHANNELS], size_t* events);
SS_API ss_status ss_analyzer_report_json(const ss_analyzer* analyzer, char** json);

/* Report JSON for any supported input; plot_dir (nullable) receives SVG + CSV plots. */
SS_API ss_status ss_analyze_file(const char* path, const char* plot_dir, char** report_json);

/* Stimulus path NULL selects the built-in stimulus. svg_path may be NULL. */
SS_API ss_status ss_compare(const char* stimulus_path, const char* sensor_profile,
                            const char* fsr_profile, const char* csv_path, const char* svg_path,
                            char** csv_text);

/* ---- telemetry ---- */

typedef struct ss_stream_options {
  const char* addr; /* "host:port"; NULL: SOLESENSE_ADDR or 127.0.0.1:7332 */
  int device_id;    /* < 0: the session header's id */
  int realtime;     /* pace at the sample rate instead of replaying at full speed */
  int max_attempts; /* connect attempts per (re)connection */
} ss_stream_options;

SS_API void ss_stream_options_default(ss_stream_options* out);
SS_API ss_status ss_stream_file(const char* session_path, const ss_stream_options* options,
                                uint64_t* frames_sent);
SS_API ss_status ss_stream_simulated(const ss_gait_params* params, const char* profile,
                                     const ss_stream_options* options, uint64_t* frames_sent);

typedef struct ss_collector ss_collector;

typedef struct ss_collector_options {
  const char* addr;           /* "host:port"; NULL: SOLESENSE_ADDR or 127.0.0.1:7332 */
  int port;                   /* >= 0 overrides the address's port; 0: ephemeral */
  const char* output_pattern; /* may contain {device} */
  const char* profile;        /* NULL: specsheet */
  const char* epoch;          /* NULL: current UTC time */
  double sample_rate_hz;
  int analyze;
  ss_divider divider;
} ss_collector_options;

SS_API void ss_collector_options_default(ss_collector_options* out);
SS_API ss_status ss_collector_new(const ss_collector_options* options, ss_collector** out);
SS_API ss_status ss_collector_start(ss_collector* collector);
SS_API uint16_t ss_collector_port(const ss_collector* collector);
/* 1 once `connections` connections have closed, 0 on timeout. */
SS_API int ss_collector_wait(ss_collector* collector, size_t connections, int timeout_ms);
/* Stops listening, flushes session files and writes reports. Summary JSON in *summary. */
SS_API ss_status ss_collector_stop(ss_collector* collector, char** summary);
SS_API ss_status ss_collector_live_view(const ss_collector* collector, int ansi_color, char** text);
SS_API void ss_collector_free(ss_collector* collector);

#ifdef __cplusplus
}
#endif

#endif
