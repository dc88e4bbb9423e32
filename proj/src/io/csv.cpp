#include "compatient/io/csv.hpp"
#include "compatient/errors.hpp"
#include "compatient/io/keyvalue.hpp"

#include <charconv>
#include <sstream>

namespace compatient::io {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_csv_value(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const TimeSeries& series) {
  out << "time_s";
  for (const auto& c : series.columns()) out << ',' << c.name;
  out << '\n';
  for (Eigen::Index i = 0; i < series.samples(); ++i) {
    out << format_csv_value(series.time()[i]);
    for (Eigen::Index j = 0; j < series.values().cols(); ++j) out << ',' << format_csv_value(series.values()(i, j));
    out << '\n';
  }
}

std::string to_csv(const TimeSeries& series) {
  std::ostringstream out;
  write_csv(out, series);
  return out.str();
}

TimeSeries parse_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(origin, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.empty() || header[0] != "time_s") throw ConfigError(origin, "header must start with time_s", 1);
  std::vector<Variable> columns;
  for (std::size_t j = 1; j < header.size(); ++j) columns.push_back({header[j], ""});
  std::vector<std::vector<double>> rows;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ConfigError(origin, "wrong number of cells", n);
    std::vector<double> row;
    for (std::size_t j = 0; j < cells.size(); ++j) row.push_back(parse_number(cells[j], header[j], n));
    rows.push_back(std::move(row));
  }
  Eigen::VectorXd time(static_cast<Eigen::Index>(rows.size()));
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    time[static_cast<Eigen::Index>(i)] = rows[i][0];
    for (std::size_t j = 0; j < columns.size(); ++j) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j + 1];
    }
  }
  return TimeSeries(std::move(columns), std::move(time), std::move(values));
}

TimeSeries read_csv(const std::string& path) { return parse_csv(read_file(path), path); }

void read_abp_csv(const std::string& path, std::vector<double>& time_s, std::vector<double>& pressure_mmHg) {
  const TimeSeries ts = read_csv(path);
  if (ts.columns().size() != 1 || ts.columns()[0].name != "pressure_mmHg") {
    throw ConfigError(path, "ABP record needs the header time_s,pressure_mmHg", 1);
  }
  time_s.assign(ts.time().data(), ts.time().data() + ts.samples());
  const Eigen::VectorXd p = ts.column("pressure_mmHg");
  pressure_mmHg.assign(p.data(), p.data() + p.size());
}

}  // namespace compatient::io
