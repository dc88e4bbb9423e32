#pragma once

#include "compatient/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace compatient::io {

/// `key = value` lines: label first, then metric_keys() order; NA for skipped.
std::string format_metrics(const scenario::ScenarioResult& result);

/// Scenario x metric matrix; failed scenarios carry their error and NA cells.
std::string comparison_csv(const std::vector<scenario::ScenarioResult>& results);

/// Sweep table: one row per value of `path`.
std::string sweep_csv(const std::string& path, const std::vector<double>& values,
                      const std::vector<scenario::ScenarioResult>& results);

/// Writes <label>_<stage>.csv, <label>_metrics.txt and, with `svg`, the
/// per-scenario plots into `dir`.
void write_bundle(const std::filesystem::path& dir, const scenario::ScenarioResult& result, bool svg);

/// Overlay plots across scenarios (pulmonary pressure, inflammation, drug,
/// glucose-insulin phase plane) into `dir`.
void write_overlays(const std::filesystem::path& dir, const std::vector<scenario::ScenarioResult>& results);

void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace compatient::io
