#pragma once

#include "wavespeed/harness.hpp"

#include <string>
#include <utility>
#include <vector>

namespace wavespeed {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// `s,speed` rows of a frozen-speed curve.
std::string curve_csv(const FrozenSpeedCurve& curve);

/// limits.csv with empty cells for limits the run did not compute.
std::string limits_csv(const RunRecord& record);

/// c̄_T against T on a log axis with the c₀ and c_* reference lines.
std::string speeds_svg(const RunRecord& record);

/// Log-log deviation plot with the fitted line; dropped points are hollow.
std::string rate_svg(const RunRecord& record);

/// Files the record produces, in write order, as (name, content).
std::vector<std::pair<std::string, std::string>> render_outputs(const RunRecord& record, bool plots);

std::string manifest_json(const RunRecord& record);

/// Writes the rendered files and manifest.json into dir, creating it when
/// needed, and fills record.files. Throws ErrorKind::io on failure and
/// leaves the record otherwise unchanged so it can be emitted again.
void emit_outputs(RunRecord& record, const std::string& dir, bool plots = true);

}  // namespace wavespeed
