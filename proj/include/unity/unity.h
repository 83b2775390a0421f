#ifndef UNITY_UNITY_H
#define UNITY_UNITY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define UNITY_API __declspec(dllexport)
#else
#define UNITY_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. 0 is success; every other value names one failure and is
   stable across releases. Grouped by hundreds per subsystem. */
typedef int unity_status;

enum {
  UNITY_OK = 0,

  UNITY_E_MALFORMED_START_LINE = 100,
  UNITY_E_MISSING_MANDATORY_HEADER = 101,
  UNITY_E_BAD_CONTENT_LENGTH = 102,
  UNITY_E_BAD_CSEQ_METHOD = 103,
  UNITY_E_TRUNCATED_MESSAGE = 104,
  UNITY_E_INVARIANT_VIOLATION = 105,
  UNITY_E_MISSING_MEDIA_LINE = 106,
  UNITY_E_UNKNOWN_CODEC = 107,
  UNITY_E_NOT_A_REQUEST = 108,
  UNITY_E_NO_COMMON_CODEC = 109,

  UNITY_E_SCHEDULING_IN_PAST = 200,
  UNITY_E_POUCH_DEAD = 201,
  UNITY_E_UNKNOWN_ENDPOINT = 202,
  UNITY_E_WINDOW_TOO_LARGE = 203,

  UNITY_E_UNKNOWN_UNIT_TYPE = 300,
  UNITY_E_PINNING_VIOLATION = 301,
  UNITY_E_SERVICE_UNKNOWN = 302,
  UNITY_E_NO_LIVE_INSTANCE = 303,
  UNITY_E_UNKNOWN_UNIT = 304,
  UNITY_E_DUPLICATE_CMW = 305,
  UNITY_E_UNKNOWN_TOPIC = 306,

  UNITY_E_NO_ELIGIBLE_POUCH = 400,
  UNITY_E_UNKNOWN_POUCH = 401,

  UNITY_E_SYNTAX_ERROR = 500,
  UNITY_E_UNCOVERED_UNIT_TYPE = 501,
  UNITY_E_POOL_BOUNDS_ERROR = 502,
  UNITY_E_UNKNOWN_CONFIG_KEY = 503,

  UNITY_E_PROFILE_NOT_FOUND = 600,

  UNITY_E_NEGATIVE_RATE = 700,
  UNITY_E_EMPTY_WINDOW = 701,
  UNITY_E_IO_ERROR = 702,
  UNITY_E_UNKNOWN_REFERENCE = 703,

  /* API misuse: null handle or argument. */
  UNITY_E_INVALID_ARGUMENT = 900,
  /* Anything the core did not classify. */
  UNITY_E_INTERNAL = 999
};

typedef struct unity_descriptor unity_descriptor;
typedef struct unity_scenario unity_scenario;
typedef struct unity_run unity_run;
typedef struct unity_matrix unity_matrix;

/* Message of the last failing call on this thread; "" when none. Valid
   until the next API call on the same thread. */
UNITY_API const char* unity_last_error(void);
/* 1-based input line of the last parse failure, 0 when not applicable. */
UNITY_API size_t unity_last_error_line(void);
UNITY_API const char* unity_status_name(unity_status status);
UNITY_API const char* unity_version(void);

/* Strings returned through char** out-parameters are heap copies owned by
   the caller. */
UNITY_API void unity_string_free(char* s);

/* Descriptors. `ref` is a built-in name (NO1..NO5, DIST) or a file path. */
UNITY_API unity_status unity_descriptor_load(const char* ref, unity_descriptor** out);
UNITY_API unity_status unity_descriptor_parse(const char* text, unity_descriptor** out);
UNITY_API void unity_descriptor_free(unity_descriptor* d);
/* Canonical one-line pin map, e.g. "SIPh,NSS->1 H,Diah->2". Empty for
   distributed descriptors. */
UNITY_API unity_status unity_descriptor_pin_map(const unity_descriptor* d, char** out);
/* 1 pinned, 0 distributed. */
UNITY_API int unity_descriptor_is_pinned(const unity_descriptor* d);
/* Replaces the speed factor of every pool. */
UNITY_API unity_status unity_descriptor_set_speed(unity_descriptor* d, double speed);

/* Scenarios. `ref` is "paper" or a file path. */
UNITY_API unity_status unity_scenario_load(const char* ref, unity_scenario** out);
UNITY_API unity_status unity_scenario_parse(const char* text, unity_scenario** out);
/* Same keys as the scenario file format. */
UNITY_API unity_status unity_scenario_set(unity_scenario* s, const char* key, const char* value);
UNITY_API void unity_scenario_free(unity_scenario* s);

typedef struct unity_run_options {
  /* Kill `kill_pouch` at virtual time `kill_at_ms`; disabled when the pouch
     is 0. */
  double kill_at_ms;
  uint32_t kill_pouch;
  /* Keep per-frame media rows (media.csv). Jitter statistics are computed
     either way. */
  int keep_media;
  /* Worker threads for matrix runs; 0 picks the hardware count. */
  unsigned threads;
} unity_run_options;

UNITY_API void unity_run_options_init(unity_run_options* o);

UNITY_API unity_status unity_run_experiment(const char* name, const unity_descriptor* d, const unity_scenario* s,
                                            uint64_t seed, const unity_run_options* o, unity_run** out);
/* calls.csv, cpu.csv, media.csv, summary.json and unity.log.tsv into `dir`. */
UNITY_API unity_status unity_run_write(const unity_run* r, const char* dir);
/* `which`: "calls", "cpu", "media", "summary" or "log". */
UNITY_API unity_status unity_run_artifact(const unity_run* r, const char* which, char** out);
UNITY_API void unity_run_free(unity_run* r);

/* Runs every descriptor with the same scenario and seed. */
UNITY_API unity_status unity_run_matrix(const char* const* names, const unity_descriptor* const* descriptors,
                                        size_t count, const unity_scenario* s, uint64_t seed,
                                        const unity_run_options* o, unity_matrix** out);
UNITY_API unity_status unity_matrix_write(const unity_matrix* m, const char* dir);
UNITY_API unity_status unity_matrix_ranking(const unity_matrix* m, char** out);
UNITY_API size_t unity_matrix_size(const unity_matrix* m);
/* Borrowed; lives as long as the matrix. */
UNITY_API const unity_run* unity_matrix_run(const unity_matrix* m, size_t index);
UNITY_API void unity_matrix_free(unity_matrix* m);

/* Parses one SIP message and returns its canonical serialization. */
UNITY_API unity_status unity_sip_normalize(const char* data, size_t len, char** out);
/* Parses one SIP message and returns its fields as JSON. */
UNITY_API unity_status unity_sip_describe(const char* data, size_t len, char** out);

#ifdef __cplusplus
}
#endif

#endif
