#pragma once

#include "compatient/kernel/state.hpp"

#include <ostream>
#include <string>

namespace compatient::io {

/// 9 significant digits, '.' decimal point, no locale dependence.
std::string format_csv_value(double v);

/// Header `time_s,<col>,...` then one row per sample; '\n' line endings.
void write_csv(std::ostream& out, const TimeSeries& series);
std::string to_csv(const TimeSeries& series);

/// Inverse of write_csv. Units are not stored, so columns come back unitless.
TimeSeries parse_csv(const std::string& text, const std::string& origin = "<csv>");
TimeSeries read_csv(const std::string& path);

/// Two-column record `time_s,pressure_mmHg` (header required).
void read_abp_csv(const std::string& path, std::vector<double>& time_s, std::vector<double>& pressure_mmHg);

}  // namespace compatient::io
