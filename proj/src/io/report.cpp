#include "compatient/io/report.hpp"
#include "compatient/errors.hpp"
#include "compatient/io/csv.hpp"
#include "compatient/io/svg.hpp"

#include <fstream>
#include <sstream>

namespace compatient::io {

namespace {

std::string cell(const scenario::MetricValue& v) { return v ? format_csv_value(*v) : "NA"; }

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Samples of a series restricted to t >= from_s, time rescaled by `unit`.
Trace column_trace(const TimeSeries& s, const std::string& column, const std::string& label, double from_s = 0.0,
                   double unit = 1.0) {
  Trace t{label, {}, {}};
  const Eigen::VectorXd y = s.column(column);
  for (Eigen::Index i = 0; i < s.samples(); ++i) {
    if (s.time()[i] < from_s) continue;
    t.x.push_back((s.time()[i] - from_s) / unit);
    t.y.push_back(y[i]);
  }
  return t;
}

Trace corrected_pressure(const TimeSeries& s, const std::string& id, const std::string& label, double from_s) {
  Trace t = column_trace(s, "P_" + id, label, from_s);
  const Trace off = column_trace(s, "pressure_offset", label, from_s);
  for (std::size_t i = 0; i < t.y.size(); ++i) t.y[i] -= off.y[i];
  return t;
}

double last_beats_start(const TimeSeries& s, int beats_shown, double period_s) {
  const double end = s.time()[s.samples() - 1];
  return std::max(0.0, end - beats_shown * period_s);
}

double period_of(const TimeSeries& s) {
  // The circulation is sampled at 200 points per beat.
  return 200.0 * (s.time()[1] - s.time()[0]);
}

}  // namespace

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
  if (!out) throw Error("failed writing " + file.string());
}

std::string format_metrics(const scenario::ScenarioResult& result) {
  std::ostringstream s;
  s << "label = " << result.label << '\n';
  s << "status = " << (result.ok() ? "ok" : "failed") << '\n';
  for (const auto& [key, value] : result.metrics) s << key << " = " << cell(value) << '\n';
  return s.str();
}

std::string comparison_csv(const std::vector<scenario::ScenarioResult>& results) {
  std::ostringstream s;
  s << "label,status";
  for (const auto& key : scenario::metric_keys()) s << ',' << key;
  s << '\n';
  for (const auto& r : results) {
    s << r.label << ',' << (r.ok() ? "ok" : "failed");
    for (const auto& key : scenario::metric_keys()) s << ',' << (r.ok() ? cell(r.metric(key)) : "NA");
    s << '\n';
  }
  return s.str();
}

std::string sweep_csv(const std::string& path, const std::vector<double>& values,
                      const std::vector<scenario::ScenarioResult>& results) {
  std::ostringstream s;
  s << path << ",label,status";
  for (const auto& key : scenario::metric_keys()) s << ',' << key;
  s << '\n';
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    s << format_csv_value(values[i]) << ',' << r.label << ',' << (r.ok() ? "ok" : "failed");
    for (const auto& key : scenario::metric_keys()) s << ',' << (r.ok() ? cell(r.metric(key)) : "NA");
    s << '\n';
  }
  return s.str();
}

void write_bundle(const std::filesystem::path& dir, const scenario::ScenarioResult& result, bool svg) {
  std::filesystem::create_directories(dir);
  const std::string& label = result.label;
  for (const auto& [stage, series] : result.series) write_text(dir / (label + "_" + stage + ".csv"), to_csv(series));
  write_text(dir / (label + "_metrics.txt"), format_metrics(result));
  if (!svg) return;

  constexpr double kDay = 86400.0;
  if (auto it = result.series.find("circulation"); it != result.series.end()) {
    const auto& s = it->second;
    const double from = last_beats_start(s, 3, period_of(s));
    std::vector<Trace> traces;
    for (const char* id : {"pap", "ps", "pc", "pv"}) traces.push_back(corrected_pressure(s, id, id, from));
    write_text(dir / (label + "_pulmonary_pressure.svg"),
               line_plot({label + ": pulmonary pressures, last 3 beats", "time (s)", "pressure (mmHg)"}, traces));
    const Trace pap = corrected_pressure(s, "pap", "pap", from);
    const Trace pc = corrected_pressure(s, "pc", "pc", from);
    write_text(dir / (label + "_lung_phase.svg"),
               line_plot({label + ": lung pressure phase space", "pulmonary artery (mmHg)",
                          "pulmonary capillaries (mmHg)"},
                         {{label, pap.y, pc.y}}));
  }
  if (auto it = result.series.find("diabetes"); it != result.series.end()) {
    const auto& s = it->second;
    write_text(dir / (label + "_glucose_insulin.svg"),
               line_plot({label + ": glucose-insulin phase space", "glucose (mg/dL)", "insulin (uU/mL)"},
                         {{label, to_vector(s.column("G")), to_vector(s.column("I"))}}));
  }
  if (auto it = result.series.find("pk"); it != result.series.end()) {
    write_text(dir / (label + "_drug.svg"),
               line_plot({label + ": drug concentration", "time (days)", "concentration (mg/L)"},
                         {column_trace(it->second, "drug", label, 0.0, kDay)}));
  }
  if (auto it = result.series.find("coupling"); it != result.series.end()) {
    write_text(dir / (label + "_inflammation.svg"),
               line_plot({label + ": inflammation score", "time (days)", "IR"},
                         {column_trace(it->second, "IR", label, 0.0, kDay)}));
  }
}

void write_overlays(const std::filesystem::path& dir, const std::vector<scenario::ScenarioResult>& results) {
  constexpr double kDay = 86400.0;
  std::vector<Trace> pc, ir, drug, phase;
  for (const auto& r : results) {
    if (!r.ok()) continue;
    if (auto it = r.series.find("circulation"); it != r.series.end()) {
      const auto& s = it->second;
      pc.push_back(corrected_pressure(s, "pc", r.label, last_beats_start(s, 1, period_of(s))));
    }
    if (auto it = r.series.find("coupling"); it != r.series.end()) {
      ir.push_back(column_trace(it->second, "IR", r.label, 0.0, kDay));
    }
    if (auto it = r.series.find("pk"); it != r.series.end()) {
      drug.push_back(column_trace(it->second, "drug", r.label, 0.0, kDay));
    }
    if (auto it = r.series.find("diabetes"); it != r.series.end()) {
      phase.push_back({r.label, to_vector(it->second.column("G")), to_vector(it->second.column("I"))});
    }
  }
  write_text(dir / "overlay_pulmonary_pressure.svg",
             line_plot({"Pulmonary capillary pressure, last beat", "time in beat (s)", "pressure (mmHg)"}, pc));
  write_text(dir / "overlay_inflammation.svg", line_plot({"Inflammation score", "time (days)", "IR"}, ir));
  write_text(dir / "overlay_drug.svg", line_plot({"Drug concentration", "time (days)", "concentration (mg/L)"}, drug));
  write_text(dir / "overlay_glucose_insulin.svg",
             line_plot({"Glucose-insulin phase space", "glucose (mg/dL)", "insulin (uU/mL)"}, phase));
}

}  // namespace compatient::io
