#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "solesense/units.hpp"

namespace solesense {

struct CalibrationPoint {
  Pressure pressure;
  Resistance resistance;
};

// Monotone pressure -> resistance map, piecewise linear in (pressure, ln R).
// Immutable once fitted; construct through fit_profile().
class CalibrationProfile {
 public:
  const std::string& name() const noexcept { return name_; }
  // De-duplicated, strictly increasing in pressure.
  const std::vector<CalibrationPoint>& points() const noexcept { return points_; }
  Pressure onset() const noexcept { return onset_; }
  Pressure max_pressure() const noexcept { return points_.back().pressure; }
  // Resistance at onset (the largest finite value the sensor reports).
  double max_ohms() const noexcept { return points_.front().resistance.ohms_or_inf(); }
  // Resistance at and beyond the last calibration point.
  double min_ohms() const noexcept { return points_.back().resistance.ohms_or_inf(); }
  double fit_r2() const noexcept { return fit_r2_; }

  // Open circuit below onset, clamped to the end points outside the data.
  Resistance static_resistance(Pressure p) const;

  // Smallest-error pressure in [onset, max_pressure] whose static resistance matches
  // `ohms`, found by monotone bisection. Values outside [min_ohms, max_ohms] clamp to
  // the corresponding end of the range.
  Pressure pressure_for(double ohms) const;

 private:
  friend CalibrationProfile fit_profile(std::string name, std::span<const CalibrationPoint> points,
                                        Pressure onset);

  std::string name_;
  std::vector<CalibrationPoint> points_;
  std::vector<double> log_ohms_;
  Pressure onset_;
  double fit_r2_ = 1.0;
};

// Sorts by pressure, averages resistances at duplicate pressures, and rejects data whose
// resistance rises with pressure. Throws Error(Fit) naming the offending pair.
CalibrationProfile fit_profile(std::string name, std::span<const CalibrationPoint> points,
                               Pressure onset);

// Built-in profiles.
CalibrationProfile table44_profile();      // pressure vs resistance measurements
CalibrationProfile specsheet_profile();    // 200 kPa -> 150 kOhm, 750 kPa -> 200 Ohm
CalibrationProfile table43_profile();      // fabricated sensor's step in the time-series log
CalibrationProfile fsr_reference_profile();  // commercial FSR comparison levels

// Looks up a built-in profile: "table44", "specsheet", "table43", "fsr".
std::optional<CalibrationProfile> builtin_profile(std::string_view name);
std::vector<std::string> builtin_profile_names();

// Built-in name, a `.json` profile file, or a `pressure_pa,resistance_ohm` CSV
// (onset = min(200 kPa, lowest pressure)). Throws Config/Io/Parse/Fit.
CalibrationProfile load_profile(const std::string& name_or_path);

inline constexpr double kDefaultOnsetPa = 200'000.0;

std::vector<CalibrationPoint> read_calibration_csv(const std::string& path);
void write_calibration_csv(std::span<const CalibrationPoint> points, const std::string& path);
std::string profile_to_json(const CalibrationProfile& profile);
CalibrationProfile profile_from_json(const std::string& text);

struct DynamicsConfig {
  double tau_load_s;
  double tau_recover_s;
  double hysteresis_halfwidth_pa;
  double sample_period_s;

  // Response/recovery times read as the time to cover 90% of a step; halfwidth is
  // 3% of the profile's pressure span (6% full loop).
  static DynamicsConfig for_profile(const CalibrationProfile& profile);
  void validate() const;
};

inline constexpr double kResponseTime90_s = 0.120;
inline constexpr double kRecoveryTime90_s = 0.100;
inline constexpr double kHysteresisFraction = 0.06;

struct SensorState {
  Pressure effective_pressure{};
  Resistance lagged_resistance = Resistance::open_circuit();
  double last_timestamp_s = 0.0;

  static SensorState at(double timestamp_s) {
    SensorState s;
    s.last_timestamp_s = timestamp_s;
    return s;
  }
};

struct StepResult {
  SensorState state;
  Resistance resistance;
};

// Play-operator hysteresis, then a first-order lag toward the static resistance.
// Throws Error(Ordering) when timestamp_s < state.last_timestamp_s.
StepResult step(const SensorState& state, Pressure applied, double timestamp_s,
                const CalibrationProfile& profile, const DynamicsConfig& dynamics);

// Rate-independent backlash: output follows input only outside +/- halfwidth.
double play_operator(double previous_output, double input, double halfwidth);

struct Characterization {
  std::string profile_name;
  double onset_pa;
  double max_pressure_pa;
  double ohms_at_onset;
  double ohms_at_max;
  std::optional<double> sensitivity_pa_per_ohm;  // empty for a flat profile
  double sensitivity_ohm_per_pa;
  double reference_sensitivity_pa_per_ohm;  // figure quoted for the fabricated sensor
  bool sensitivity_discrepancy;
  double response_time_s;
  double recovery_time_s;
  double hysteresis_pct;
  double threshold_band_pct;
  double fit_r2;
};

// Figures measured from the model: step response/recovery simulated at the dynamics'
// sample period, hysteresis from a quasi-static onset -> max -> onset sweep.
Characterization characterize(const CalibrationProfile& profile, const DynamicsConfig& dynamics);

std::string characterization_to_json(const Characterization& c);

// Time to cover 90% of a resistance step, simulated at dynamics.sample_period_s.
double measure_step_time(const CalibrationProfile& profile, const DynamicsConfig& dynamics,
                         Pressure from, Pressure to);

// Largest loading/unloading gap, in equivalent pressure, over a settled triangular sweep
// lo -> hi -> lo with `steps` points per leg.
double measure_loop_width_pa(const CalibrationProfile& profile, const DynamicsConfig& dynamics,
                             Pressure lo, Pressure hi, std::size_t steps = 1100);

}  // namespace solesense
