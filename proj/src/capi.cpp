#include "wavespeed/wavespeed.h"

#include "wavespeed/harness.hpp"
#include "wavespeed/outputs.hpp"

#include <cstring>
#include <exception>
#include <optional>
#include <string>

struct wsl_experiment {
    wavespeed::ExperimentConfig config;
    std::optional<wavespeed::RunRecord> record;
    std::string summary;
    std::string manifest;
};

namespace {

thread_local std::string last_error;

int status_of(wavespeed::ErrorKind kind) { return wavespeed::exit_code_for(kind); }

template <typename F>
int guarded(F&& fn) {
    try {
        last_error.clear();
        return fn();
    } catch (const wavespeed::Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::exception& e) {
        last_error = e.what();
        return WSL_NUMERIC;
    } catch (...) {
        last_error = "unknown failure";
        return WSL_NUMERIC;
    }
}

int missing(const char* what) {
    last_error = std::string("null ") + what;
    return WSL_VALIDATION;
}

void refresh(wsl_experiment* exp) {
    exp->summary = exp->record ? exp->record->summary() : std::string();
    exp->manifest = exp->record ? wavespeed::manifest_json(*exp->record) : std::string();
}

int adopt(wavespeed::ExperimentConfig config, wsl_experiment** out) {
    auto* exp = new wsl_experiment{};
    exp->config = std::move(config);
    *out = exp;
    return WSL_OK;
}

}  // namespace

extern "C" {

const char* wsl_version(void) { return wavespeed::kToolVersion; }

const char* wsl_last_error(void) { return last_error.c_str(); }

int wsl_experiment_load(const char* path, wsl_experiment** out) {
    if (!out) return missing("output handle");
    *out = nullptr;
    if (!path) return missing("path");
    return guarded([&] { return adopt(wavespeed::load_config(path), out); });
}

int wsl_experiment_parse(const char* toml_text, wsl_experiment** out) {
    if (!out) return missing("output handle");
    *out = nullptr;
    if (!toml_text) return missing("config text");
    return guarded([&] { return adopt(wavespeed::parse_config(toml_text), out); });
}

void wsl_experiment_free(wsl_experiment* exp) { delete exp; }

int wsl_experiment_set_kind(wsl_experiment* exp, const char* kind) {
    if (!exp) return missing("experiment");
    if (!kind) return missing("kind");
    return guarded([&] {
        auto c = exp->config;
        c.kind = wavespeed::parse_kind(kind);
        wavespeed::validate(c);
        exp->config = c;
        return WSL_OK;
    });
}

int wsl_experiment_set_jobs(wsl_experiment* exp, unsigned jobs) {
    if (!exp) return missing("experiment");
    if (jobs == 0) {
        last_error = "jobs must be at least 1";
        return WSL_VALIDATION;
    }
    exp->config.jobs = jobs;
    return WSL_OK;
}

int wsl_experiment_set_output(wsl_experiment* exp, const char* dir) {
    if (!exp) return missing("experiment");
    if (!dir || !*dir) return missing("directory");
    exp->config.output = dir;
    return WSL_OK;
}

const char* wsl_experiment_output(const wsl_experiment* exp) { return exp ? exp->config.output.c_str() : ""; }

int wsl_experiment_run(wsl_experiment* exp) {
    if (!exp) return missing("experiment");
    return guarded([&] {
        exp->record = wavespeed::run_experiment(exp->config);
        refresh(exp);
        const int code = exp->record->exit_code();
        if (code != WSL_OK) {
            for (const auto& s : exp->record->stages) {
                if (!s.ok()) {
                    last_error = s.name + ": " + s.message;
                    break;
                }
            }
        }
        return code;
    });
}

int wsl_experiment_emit(wsl_experiment* exp, const char* dir, int plots) {
    if (!exp) return missing("experiment");
    if (!exp->record) {
        last_error = "nothing to emit before a run";
        return WSL_VALIDATION;
    }
    return guarded([&] {
        wavespeed::emit_outputs(*exp->record, dir ? dir : exp->config.output, plots != 0);
        refresh(exp);
        return WSL_OK;
    });
}

const char* wsl_experiment_summary(const wsl_experiment* exp) { return exp ? exp->summary.c_str() : ""; }

const char* wsl_experiment_manifest(const wsl_experiment* exp) { return exp ? exp->manifest.c_str() : ""; }

size_t wsl_experiment_estimate_count(const wsl_experiment* exp) {
    return exp && exp->record ? exp->record->report.estimates.size() : 0;
}

int wsl_experiment_estimate(const wsl_experiment* exp, size_t index, double* T, double* cbar, double* uncertainty) {
    if (!exp) return missing("experiment");
    if (index >= wsl_experiment_estimate_count(exp)) {
        last_error = "estimate index out of range";
        return WSL_VALIDATION;
    }
    const auto& e = exp->record->report.estimates[index];
    if (T) *T = e.T;
    if (cbar) *cbar = e.cbar;
    if (uncertainty) *uncertainty = e.uncertainty;
    return WSL_OK;
}

int wsl_experiment_limit(const wsl_experiment* exp, const char* name, double* value) {
    if (!exp) return missing("experiment");
    if (!name || !value) return missing("argument");
    if (!exp->record) {
        last_error = "no run yet";
        return WSL_VALIDATION;
    }
    const auto& r = *exp->record;
    const auto& rep = r.report;
    std::optional<double> v;
    const std::string n = name;
    if (n == "c0" && r.has_c0) v = rep.c0;
    else if (n == "cstar" && r.has_cstar) v = rep.cstar;
    else if (n == "d0") v = rep.d0;
    else if (n == "dstar") v = rep.dstar;
    else if (n == "kpp") v = rep.kpp;
    else if (n == "rate_rapid") v = rep.rate_rapid;
    else if (n == "rate_slow") v = rep.rate_slow;
    if (!v) {
        last_error = "limit '" + n + "' not available";
        return WSL_VALIDATION;
    }
    *value = *v;
    return WSL_OK;
}

size_t wsl_experiment_check_count(const wsl_experiment* exp) {
    return exp && exp->record ? exp->record->checks.size() : 0;
}

int wsl_experiment_check(const wsl_experiment* exp, size_t index, const char** name, int* passed, double* value,
                         double* threshold) {
    if (!exp) return missing("experiment");
    if (index >= wsl_experiment_check_count(exp)) {
        last_error = "check index out of range";
        return WSL_VALIDATION;
    }
    const auto& c = exp->record->checks[index];
    if (name) *name = c.name.c_str();
    if (passed) *passed = c.passed ? 1 : (c.informational ? -1 : 0);
    if (value) *value = c.value;
    if (threshold) *threshold = c.threshold;
    return WSL_OK;
}

}  // extern "C"
