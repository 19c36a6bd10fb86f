#pragma once

#include "wavespeed/config.hpp"
#include "wavespeed/errors.hpp"
#include "wavespeed/evolve.hpp"
#include "wavespeed/limits.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wavespeed {

inline constexpr const char* kToolVersion = "1.0.0";

struct StageRecord {
    std::string name;
    double seconds = 0.0;
    std::optional<ErrorKind> error;
    std::string message;

    bool ok() const { return !error; }
};

/// Outcome of one property check; passed means value ≥ threshold unless
/// the detail says otherwise.
struct CheckOutcome {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
    /// Reported for reference; never counts as a failure.
    bool informational = false;
};

struct RatePoint {
    double scale = 0.0;
    double deviation = 0.0;
    /// Points with deviation ≤ noise are dropped.
    double noise = 0.0;
};

struct RateFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::vector<RatePoint> used;
    std::vector<RatePoint> dropped;
};

/// Least squares of log deviation on log scale over the points above their
/// noise floor. Fewer than 3 usable points is an insufficient-data error.
RateFit fit_rate(const std::vector<RatePoint>& points);

struct FileEntry {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunRecord {
    ExperimentConfig config;
    std::string config_digest;
    std::string tool_version = kToolVersion;
    std::vector<StageRecord> stages;
    SpeedReport report;
    bool has_c0 = false;
    bool has_cstar = false;
    /// Error of the slow limit from the window quadrature.
    double cstar_error = 0.0;
    std::optional<RateFit> rate;
    std::vector<CheckOutcome> checks;
    /// One trace per estimate, same order.
    std::vector<FrontTrace> traces;
    std::optional<FrozenSpeedCurve> curve;
    /// Filled by emit_outputs.
    std::vector<FileEntry> files;

    bool ok() const;
    /// 0 when every stage succeeded, else the code of the first failed stage.
    int exit_code() const;
    /// Plain-text summary, one line per stage, limit and check.
    std::string summary() const;
};

RunRecord run_experiment(const ExperimentConfig& config);

}  // namespace wavespeed
