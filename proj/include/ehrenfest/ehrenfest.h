#ifndef EHRENFEST_EHRENFEST_H
#define EHRENFEST_EHRENFEST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EHR_API __declspec(dllexport)
#else
#define EHR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ehr_status {
    EHR_OK = 0,
    EHR_INVALID_ARGUMENT = 1,
    EHR_PARSE = 2,
    EHR_NUMERIC = 3,
    EHR_SOLVER = 4,
    EHR_CHECK_FAILED = 5,
    EHR_IO = 6,
    EHR_INTERNAL = 7
} ehr_status;

/* Receives one line of progress output (no trailing newline). */
typedef void (*ehr_line_fn)(const char* line, void* user);

EHR_API const char* ehr_version(void);
EHR_API const char* ehr_status_name(ehr_status status);

/* Message of the last failing call on this thread; "" after a success. */
EHR_API const char* ehr_last_error(void);

/* Strings returned through char** are heap copies owned by the caller. */
EHR_API void ehr_string_free(char* s);

/* ---- scenario configuration ---- */

typedef struct ehr_config ehr_config;

/* On EHR_PARSE, ehr_last_error lists every problem, one per line. */
EHR_API ehr_status ehr_config_parse(const char* text, ehr_config** out);
EHR_API ehr_status ehr_config_load(const char* path, ehr_config** out);
EHR_API void ehr_config_free(ehr_config* config);
EHR_API ehr_status ehr_config_set_seed(ehr_config* config, uint64_t seed);
/* "counterexample", "evolve" or "crosscheck"; owned by the handle. */
EHR_API const char* ehr_config_mode(const ehr_config* config);
/* 16 hex digits; owned by the handle, valid until the next call on it. */
EHR_API const char* ehr_config_hash(const ehr_config* config);

/* ---- runs ---- */

typedef struct ehr_run ehr_run;

/* Executes the configured mode and writes artifacts and manifest.json into
 * out_dir. Returns EHR_OK whenever the manifest was written, even if checks
 * failed; inspect ehr_run_ok. log may be NULL. */
EHR_API ehr_status ehr_run_execute(const ehr_config* config, const char* out_dir, ehr_line_fn log, void* user,
                                   ehr_run** out);
EHR_API void ehr_run_free(ehr_run* run);
/* 1 iff every check passed and no stage aborted. */
EHR_API int ehr_run_ok(const ehr_run* run);
EHR_API int ehr_run_partial(const ehr_run* run);
/* Abort message of a partial run, "" otherwise. Owned by the handle. */
EHR_API const char* ehr_run_error(const ehr_run* run);
EHR_API size_t ehr_run_check_count(const ehr_run* run);
EHR_API ehr_status ehr_run_check(const ehr_run* run, size_t index, const char** name, int* passed,
                                 const char** detail);
EHR_API size_t ehr_run_output_count(const ehr_run* run);
EHR_API const char* ehr_run_output(const ehr_run* run, size_t index);
EHR_API const char* ehr_run_manifest_json(const ehr_run* run);

/* ---- exact piecewise-linear functions ---- */

typedef struct ehr_pwlin ehr_pwlin;

/* Text format "pwlin v1", a breakpoint count, then "x y" pairs of p/q. */
EHR_API ehr_status ehr_pwlin_parse(const char* text, ehr_pwlin** out);
EHR_API ehr_status ehr_pwlin_serialize(const ehr_pwlin* f, char** out);
/* The tent with nodes (0,0), (1,1), (2,0). */
EHR_API ehr_status ehr_pwlin_tent(ehr_pwlin** out);
/* f(. - t), t given as "p/q" or an integer. */
EHR_API ehr_status ehr_pwlin_translate(const ehr_pwlin* f, const char* t, ehr_pwlin** out);
/* Exact L2 inner product as "p/q". */
EHR_API ehr_status ehr_pwlin_inner_product(const ehr_pwlin* f, const ehr_pwlin* g, char** out);
/* f(x) as "p/q". */
EHR_API ehr_status ehr_pwlin_evaluate(const ehr_pwlin* f, const char* x, char** out);
EHR_API void ehr_pwlin_free(ehr_pwlin* f);

/* ---- acceptance suite ---- */

/* Runs criteria 1..8, reporting one line per criterion through line.
 * *failed receives the number of failing criteria. */
EHR_API ehr_status ehr_selftest(uint64_t seed, ehr_line_fn line, void* user, int* failed);

#ifdef __cplusplus
}
#endif

#endif
