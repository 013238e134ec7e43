#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "solesense/gait_synth.hpp"

namespace solesense {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
  std::string hex() const;
};

// Intensity ramp: 0 -> green, 0.5 -> red, 1 -> blue; input is clamped to [0, 1].
Rgb intensity_color(double fraction) noexcept;

struct Series {
  std::string name;
  // Non-finite y values are gaps: they break the polyline and print as "open" in CSV.
  std::vector<std::pair<double, double>> points;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

// One <polyline class="series"> per series (one per unbroken run of points).
std::string render_svg(const Plot& plot);

// Wide `x_label,<series names>` when every series shares the same x values, otherwise
// long `series,x,y`.
std::string render_csv(const Plot& plot);

// Writes <stem>.svg and <stem>.csv; returns both paths.
std::vector<std::string> write_plot(const Plot& plot, const std::string& stem);

// Per-channel bar meters for each device, coloured by intensity_color(p / full_scale).
std::string render_live(const std::map<std::uint8_t, PressureSample>& latest,
                        double full_scale_pa, bool ansi_color = true);

}  // namespace solesense
