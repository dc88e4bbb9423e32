#include "compatient/io/svg.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

namespace compatient::io {

namespace {

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fixed(double v, int digits = 2) {
  char buf[48];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, ptr);
}

std::string tick_text(double v) {
  char buf[48];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, std::abs(v) < 1e-12 ? 0.0 : v,
                                       std::chars_format::general, 4);
  return std::string(buf, ptr);
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// "Nice" tick step for roughly n intervals over span.
double tick_step(double span, int n) {
  const double raw = span / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double d = std::max(1.0, std::abs(lo)) * 0.05;
    return {lo - d, hi + d};
  }
  const double pad = 0.04 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string line_plot(const PlotSpec& spec, const std::vector<Trace>& traces) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& t : traces) {
    for (std::size_t i = 0; i < std::min(t.x.size(), t.y.size()); ++i) {
      if (!std::isfinite(t.x[i]) || !std::isfinite(t.y[i])) continue;
      x0 = std::min(x0, t.x[i]);
      x1 = std::max(x1, t.x[i]);
      y0 = std::min(y0, t.y[i]);
      y1 = std::max(y1, t.y[i]);
    }
  }
  if (x0 > x1) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  const Range xr = padded(x0, x1);
  const Range yr = padded(y0, y1);

  const double left = 70.0, right = 150.0, top = 40.0, bottom = 55.0;
  const double w = spec.width - left - right;
  const double h = spec.height - top - bottom;
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * w; };
  auto py = [&](double y) { return top + h - (y - yr.lo) / (yr.hi - yr.lo) * h; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
    << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << fixed(left + w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(spec.title) << "</text>\n";

  for (int axis = 0; axis < 2; ++axis) {
    const Range r = axis == 0 ? xr : yr;
    const double step = tick_step(r.hi - r.lo, 6);
    for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step) {
      if (axis == 0) {
        s << "<line x1=\"" << fixed(px(v)) << "\" y1=\"" << fixed(top) << "\" x2=\"" << fixed(px(v)) << "\" y2=\""
          << fixed(top + h) << "\" stroke=\"#e5e5e5\"/>\n";
        s << "<text x=\"" << fixed(px(v)) << "\" y=\"" << fixed(top + h + 16) << "\" text-anchor=\"middle\">"
          << tick_text(v) << "</text>\n";
      } else {
        s << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(py(v)) << "\" x2=\"" << fixed(left + w) << "\" y2=\""
          << fixed(py(v)) << "\" stroke=\"#e5e5e5\"/>\n";
        s << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(py(v) + 4) << "\" text-anchor=\"end\">"
          << tick_text(v) << "</text>\n";
      }
    }
  }
  s << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(w) << "\" height=\"" << fixed(h)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << fixed(left + w / 2) << "\" y=\"" << fixed(spec.height - 14.0)
    << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  s << "<text transform=\"translate(18 " << fixed(top + h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < traces.size(); ++k) {
    const auto& t = traces[k];
    const char* colour = kPalette[k % kPalette.size()];
    s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.4\" points=\"";
    for (std::size_t i = 0; i < std::min(t.x.size(), t.y.size()); ++i) {
      if (!std::isfinite(t.x[i]) || !std::isfinite(t.y[i])) continue;
      s << (i ? " " : "") << fixed(px(t.x[i])) << ',' << fixed(py(t.y[i]));
    }
    s << "\"/>\n";
    const double ly = top + 10.0 + 18.0 * static_cast<double>(k);
    s << "<line x1=\"" << fixed(left + w + 12) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(left + w + 36)
      << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << fixed(left + w + 42) << "\" y=\"" << fixed(ly + 4) << "\">" << escape(t.label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace compatient::io
