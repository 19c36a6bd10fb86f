#include "wavespeed/wavespeed.h"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Options {
    std::string config;
    std::string out;
    unsigned jobs = 0;
    bool no_plots = false;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("config", o.config, "experiment config (TOML)")->required();
    cmd->add_option("--out", o.out, "output directory (default: the config's output)");
    cmd->add_option("--jobs", o.jobs, "worker threads (default: WAVESPEED_LAB_JOBS, then the config)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--no-plots", o.no_plots, "skip the SVG plots");
}

/// --jobs, then WAVESPEED_LAB_JOBS; nullopt keeps the config value.
std::optional<unsigned> resolve_jobs(const Options& o) {
    if (o.jobs > 0) return o.jobs;
    const char* env = std::getenv("WAVESPEED_LAB_JOBS");
    if (!env || !*env) return std::nullopt;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) throw std::invalid_argument("WAVESPEED_LAB_JOBS must be a positive integer");
    return static_cast<unsigned>(v);
}

int fail(int code) {
    std::cerr << "error: " << wsl_last_error() << '\n';
    return code;
}

int execute(const Options& o, const char* kind) {
    wsl_experiment* exp = nullptr;
    int code = wsl_experiment_load(o.config.c_str(), &exp);
    if (code != WSL_OK) return fail(code);

    std::optional<unsigned> jobs;
    try {
        jobs = resolve_jobs(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        wsl_experiment_free(exp);
        return WSL_VALIDATION;
    }
    if (kind) code = wsl_experiment_set_kind(exp, kind);
    if (code == WSL_OK && jobs) code = wsl_experiment_set_jobs(exp, *jobs);
    if (code == WSL_OK && !o.out.empty()) code = wsl_experiment_set_output(exp, o.out.c_str());
    if (code != WSL_OK) {
        fail(code);
        wsl_experiment_free(exp);
        return code;
    }

    const int run = wsl_experiment_run(exp);
    if (run != WSL_OK) std::cerr << "error: " << wsl_last_error() << '\n';
    const int emit = wsl_experiment_emit(exp, wsl_experiment_output(exp), o.no_plots ? 0 : 1);
    std::cout << wsl_experiment_summary(exp);
    if (emit == WSL_OK) {
        std::cout << "outputs written to " << wsl_experiment_output(exp) << '\n';
    } else {
        fail(emit);
    }
    wsl_experiment_free(exp);
    return run != WSL_OK ? run : emit;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Average wave speeds of time-oscillating bistable reaction-diffusion fronts"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(wsl_version()));

    Options run_opts, lemma_opts, curve_opts;
    auto* run = app.add_subcommand("run", "run the experiment the config describes");
    add_common(run, run_opts);
    auto* lemmas = app.add_subcommand("verify-lemmas", "residual and sandwich checks of the comparison functions");
    add_common(lemmas, lemma_opts);
    auto* curve = app.add_subcommand("curve", "frozen-speed curve and its mean only");
    add_common(curve, curve_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : WSL_VALIDATION;
    }

    if (*run) return execute(run_opts, nullptr);
    if (*lemmas) return execute(lemma_opts, "lemma-check");
    return execute(curve_opts, "frozen-curve");
}
