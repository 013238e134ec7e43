#include "solesense/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "text_util.hpp"

namespace solesense {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::uint8_t lerp8(std::uint8_t a, std::uint8_t b, double t) {
  return static_cast<std::uint8_t>(std::lround(a + (b - a) * t));
}

bool shares_x(const Plot& plot) {
  if (plot.series.empty()) return false;
  const auto& ref = plot.series.front().points;
  for (const auto& s : plot.series) {
    if (s.points.size() != ref.size()) return false;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (s.points[i].first != ref[i].first) return false;
    }
  }
  return true;
}

std::string y_field(double y) { return std::isfinite(y) ? format_double(y) : std::string("open"); }

}  // namespace

std::string Rgb::hex() const {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

Rgb intensity_color(double fraction) noexcept {
  constexpr Rgb green{0, 170, 0};
  constexpr Rgb red{220, 0, 0};
  constexpr Rgb blue{0, 0, 220};
  double f = std::isnan(fraction) ? 0.0 : std::clamp(fraction, 0.0, 1.0);
  if (f <= 0.5) {
    const double t = f / 0.5;
    return {lerp8(green.r, red.r, t), lerp8(green.g, red.g, t), lerp8(green.b, red.b, t)};
  }
  const double t = (f - 0.5) / 0.5;
  return {lerp8(red.r, blue.r, t), lerp8(red.g, blue.g, t), lerp8(red.b, blue.b, t)};
}

std::string render_svg(const Plot& plot) {
  constexpr double width = 800, height = 480;
  constexpr double left = 90, right = 160, top = 40, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : plot.series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"480\" viewBox=\"0 0 800 480\">\n";
  out += "<rect width=\"800\" height=\"480\" fill=\"white\"/>\n";
  out += "<text class=\"title\" x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
         xml_escape(plot.title) + "</text>\n";
  out += "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  out += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top + ph) + "\" x2=\"" + fixed(left + pw) +
         "\" y2=\"" + fixed(top + ph) + "\"/>\n";
  out += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top) + "\" x2=\"" + fixed(left) + "\" y2=\"" +
         fixed(top + ph) + "\"/>\n";
  out += "</g>\n<g class=\"ticks\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    out += "<text x=\"" + fixed(sx(xv)) + "\" y=\"" + fixed(top + ph + 16) +
           "\" text-anchor=\"middle\">" + tick_label(xv) + "</text>\n";
    out += "<text x=\"" + fixed(left - 6) + "\" y=\"" + fixed(sy(yv) + 4) + "\" text-anchor=\"end\">" +
           tick_label(yv) + "</text>\n";
  }
  out += "</g>\n";
  out += "<text class=\"x-label\" x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(height - 16) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + xml_escape(plot.x_label) + "</text>\n";
  out += "<text class=\"y-label\" x=\"18\" y=\"" + fixed(top + ph / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " + fixed(top + ph / 2) +
         ")\">" + xml_escape(plot.y_label) + "</text>\n";

  const std::size_t n = plot.series.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = plot.series[i];
    const Rgb color = intensity_color(n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
    std::string run;
    auto flush = [&] {
      if (run.empty()) return;
      out += "<polyline class=\"series\" data-series=\"" + xml_escape(s.name) +
             "\" fill=\"none\" stroke-width=\"1.5\" stroke=\"" + color.hex() + "\" points=\"" + run +
             "\"/>\n";
      run.clear();
    };
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        flush();
        continue;
      }
      if (!run.empty()) run += ' ';
      run += fixed(sx(x)) + "," + fixed(sy(y));
    }
    flush();
    const double ly = top + 14 + 18.0 * i;
    out += "<g class=\"legend\"><line x1=\"" + fixed(width - right + 12) + "\" y1=\"" + fixed(ly - 4) +
           "\" x2=\"" + fixed(width - right + 32) + "\" y2=\"" + fixed(ly - 4) + "\" stroke=\"" +
           color.hex() + "\" stroke-width=\"2\"/><text x=\"" + fixed(width - right + 38) + "\" y=\"" +
           fixed(ly) + "\" font-size=\"11\">" + xml_escape(s.name) + "</text></g>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render_csv(const Plot& plot) {
  std::string out;
  if (shares_x(plot)) {
    out += plot.x_label;
    for (const auto& s : plot.series) out += "," + s.name;
    out += "\n";
    const auto& ref = plot.series.front().points;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      out += format_double(ref[i].first);
      for (const auto& s : plot.series) out += "," + y_field(s.points[i].second);
      out += "\n";
    }
    return out;
  }
  out += "series," + plot.x_label + "," + plot.y_label + "\n";
  for (const auto& s : plot.series) {
    for (auto [x, y] : s.points) out += s.name + "," + format_double(x) + "," + y_field(y) + "\n";
  }
  return out;
}

std::vector<std::string> write_plot(const Plot& plot, const std::string& stem) {
  const std::string svg = stem + ".svg";
  const std::string csv = stem + ".csv";
  write_text_file(svg, render_svg(plot));
  write_text_file(csv, render_csv(plot));
  return {svg, csv};
}

std::string render_live(const std::map<std::uint8_t, PressureSample>& latest, double full_scale_pa,
                        bool ansi_color) {
  constexpr int bar_width = 40;
  std::string out;
  if (latest.empty()) return "waiting for devices...\n";
  for (const auto& [id, s] : latest) {
    char head[96];
    std::snprintf(head, sizeof head, "device %u  t=%.3f s\n", static_cast<unsigned>(id), s.timestamp_s);
    out += head;
    for (auto c : kAllChannels) {
      const double pa = s[c].pascals();
      const double frac = full_scale_pa > 0 ? std::clamp(pa / full_scale_pa, 0.0, 1.0) : 0.0;
      const int filled = static_cast<int>(std::lround(frac * bar_width));
      char label[48];
      std::snprintf(label, sizeof label, "  %-16s ", std::string(channel_name(c)).c_str());
      out += label;
      if (ansi_color) {
        const Rgb col = intensity_color(frac);
        char esc[32];
        std::snprintf(esc, sizeof esc, "\x1b[38;2;%u;%u;%um", col.r, col.g, col.b);
        out += esc;
      }
      out += std::string(static_cast<std::size_t>(filled), '#');
      if (ansi_color) out += "\x1b[0m";
      out += std::string(static_cast<std::size_t>(bar_width - filled), '.');
      char val[32];
      std::snprintf(val, sizeof val, " %8.1f kPa\n", pa / 1000.0);
      out += val;
    }
  }
  return out;
}

}  // namespace solesense
