/* Exercises the shared-library interface from plain C. */
#include "wavespeed/wavespeed.h"

#include <math.h>
#include <stdio.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                   \
    do {                                                               \
        if (!(cond)) {                                                 \
            fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                \
        }                                                              \
    } while (0)

static const char* kConfig =
    "kind = \"sweep\"\n"
    "T = [0.5, 2.0]\n"
    "jobs = 1\n"
    "[nonlinearity]\n"
    "a = { kind = \"constant\", mean = 1.0 }\n"
    "b = { kind = \"constant\", mean = 0.3 }\n"
    "[solver]\n"
    "L = 30.0\n"
    "dx = 0.1\n"
    "horizon = 30.0\n"
    "horizon_periods = 1.0\n";

int main(int argc, char** argv) {
    wsl_experiment* exp = NULL;
    double v = 0.0, T = 0.0, cbar = 0.0, unc = 0.0;
    const char* out_dir = argc > 1 ? argv[1] : "capi_out";
    size_t i;

    EXPECT(strlen(wsl_version()) > 0);

    EXPECT(wsl_experiment_parse("kind = \"sweep\"\nT = [1.0, 0.5]\n", &exp) == WSL_VALIDATION);
    EXPECT(exp == NULL);
    EXPECT(strlen(wsl_last_error()) > 0);
    EXPECT(wsl_experiment_load("/nonexistent/config.toml", &exp) == WSL_IO);
    EXPECT(wsl_experiment_parse(NULL, &exp) == WSL_VALIDATION);

    EXPECT(wsl_experiment_parse(kConfig, &exp) == WSL_OK);
    if (!exp) return 1;
    EXPECT(wsl_experiment_set_kind(exp, "bogus") == WSL_VALIDATION);
    EXPECT(wsl_experiment_set_jobs(exp, 0) == WSL_VALIDATION);
    EXPECT(wsl_experiment_emit(exp, out_dir, 1) == WSL_VALIDATION);
    EXPECT(wsl_experiment_limit(exp, "c0", &v) == WSL_VALIDATION);

    EXPECT(wsl_experiment_run(exp) == WSL_OK);
    EXPECT(wsl_experiment_estimate_count(exp) == 2);
    for (i = 0; i < wsl_experiment_estimate_count(exp); ++i) {
        EXPECT(wsl_experiment_estimate(exp, i, &T, &cbar, &unc) == WSL_OK);
        /* constant coefficients: the closed-form speed 0.2·√2 at every T */
        EXPECT(fabs(cbar - 0.2 * sqrt(2.0)) < 2e-3);
    }
    EXPECT(wsl_experiment_estimate(exp, 5, &T, &cbar, &unc) == WSL_VALIDATION);
    EXPECT(wsl_experiment_limit(exp, "c0", &v) == WSL_OK);
    EXPECT(fabs(v - 0.2 * sqrt(2.0)) < 1e-8);
    EXPECT(wsl_experiment_limit(exp, "d0", &v) == WSL_OK);
    EXPECT(fabs(v - 0.2 * sqrt(2.0)) < 1e-12);
    EXPECT(wsl_experiment_limit(exp, "kpp", &v) == WSL_VALIDATION);
    EXPECT(wsl_experiment_check_count(exp) == 0);
    EXPECT(strstr(wsl_experiment_summary(exp), "cbar") != NULL);

    EXPECT(wsl_experiment_emit(exp, "/proc/forbidden/out", 1) == WSL_IO);
    EXPECT(wsl_experiment_emit(exp, out_dir, 0) == WSL_OK);
    EXPECT(strstr(wsl_experiment_manifest(exp), "speeds.csv") != NULL);
    EXPECT(strstr(wsl_experiment_manifest(exp), "speeds.svg") == NULL);
    wsl_experiment_free(exp);
    wsl_experiment_free(NULL);

    if (failures) fprintf(stderr, "%d failures\n", failures);
    return failures ? 1 : 0;
}
