#ifndef WAVESPEED_WAVESPEED_H
#define WAVESPEED_WAVESPEED_H

#include <stddef.h>

#if defined(WAVESPEED_BUILDING)
#define WSL_API __attribute__((visibility("default")))
#else
#define WSL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; they double as process exit codes. */
typedef enum {
    WSL_OK = 0,
    WSL_VALIDATION = 1,
    WSL_NUMERIC = 2,
    WSL_IO = 3
} wsl_status;

typedef struct wsl_experiment wsl_experiment;

WSL_API const char* wsl_version(void);

/* Parse a TOML config from a file or from text. On failure *out is NULL
   and wsl_last_error() describes the problem. */
WSL_API int wsl_experiment_load(const char* path, wsl_experiment** out);
WSL_API int wsl_experiment_parse(const char* toml_text, wsl_experiment** out);
WSL_API void wsl_experiment_free(wsl_experiment* exp);

/* Message of the most recent failure on this thread. */
WSL_API const char* wsl_last_error(void);

/* kind: sweep, rapid-rate, slow-rate, sign-reversal, lemma-check, frozen-curve */
WSL_API int wsl_experiment_set_kind(wsl_experiment* exp, const char* kind);
WSL_API int wsl_experiment_set_jobs(wsl_experiment* exp, unsigned jobs);
WSL_API int wsl_experiment_set_output(wsl_experiment* exp, const char* dir);
/* Output directory from the config, or the last one set. */
WSL_API const char* wsl_experiment_output(const wsl_experiment* exp);

/* Runs the experiment. Returns WSL_OK when every stage succeeded, else the
   status of the first failed stage. The results stay available either way. */
WSL_API int wsl_experiment_run(wsl_experiment* exp);

/* Writes CSV, SVG (when plots is nonzero) and manifest.json. A failed
   write keeps the results so the call can be repeated. */
WSL_API int wsl_experiment_emit(wsl_experiment* exp, const char* dir, int plots);

/* Plain-text summary of the last run. */
WSL_API const char* wsl_experiment_summary(const wsl_experiment* exp);
/* manifest.json text of the last run (file list filled after emit). */
WSL_API const char* wsl_experiment_manifest(const wsl_experiment* exp);

WSL_API size_t wsl_experiment_estimate_count(const wsl_experiment* exp);
WSL_API int wsl_experiment_estimate(const wsl_experiment* exp, size_t index, double* T, double* cbar,
                                    double* uncertainty);

/* name: c0, cstar, d0, dstar, kpp, rate_rapid, rate_slow.
   WSL_VALIDATION when the run did not produce that value. */
WSL_API int wsl_experiment_limit(const wsl_experiment* exp, const char* name, double* value);

WSL_API size_t wsl_experiment_check_count(const wsl_experiment* exp);
/* passed is 1, 0, or -1 for an informational check that did not hold. */
WSL_API int wsl_experiment_check(const wsl_experiment* exp, size_t index, const char** name, int* passed,
                                 double* value, double* threshold);

#ifdef __cplusplus
}
#endif

#endif
