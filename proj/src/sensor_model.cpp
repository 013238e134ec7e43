#include "solesense/sensor_model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"

namespace solesense {

namespace {

constexpr double kReferenceSensitivityPaPerOhm = 0.02;
constexpr double kThresholdBandPct = 10.0;

std::string describe(const CalibrationPoint& p) {
  return "(" + format_double(p.pressure.pascals()) + " Pa, " +
         format_double(p.resistance.ohms()) + " Ohm)";
}

}  // namespace

CalibrationProfile fit_profile(std::string name, std::span<const CalibrationPoint> points,
                               Pressure onset) {
  for (const auto& p : points) {
    if (p.resistance.is_open()) {
      throw Error(ErrorKind::Fit, "calibration resistance must be finite");
    }
    if (!(p.pressure.pascals() > 0.0)) {
      throw Error(ErrorKind::Fit, "calibration pressure must be > 0");
    }
  }

  std::vector<CalibrationPoint> sorted(points.begin(), points.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.pressure < b.pressure;
  });

  // Average the resistances of rows that share a pressure.
  std::vector<CalibrationPoint> merged;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < sorted.size() && sorted[j].pressure == sorted[i].pressure) {
      sum += sorted[j].resistance.ohms();
      ++j;
    }
    merged.push_back({sorted[i].pressure, Resistance::ohms(sum / static_cast<double>(j - i))});
    i = j;
  }

  if (merged.size() < 2) {
    throw Error(ErrorKind::Fit, "calibration needs at least 2 distinct pressures, got " +
                                    std::to_string(merged.size()));
  }
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    if (merged[i + 1].resistance.ohms() > merged[i].resistance.ohms()) {
      throw Error(ErrorKind::Fit, "resistance rises with pressure between " +
                                      describe(merged[i]) + " and " + describe(merged[i + 1]));
    }
  }
  if (onset > merged.front().pressure) {
    throw Error(ErrorKind::Fit, "onset " + format_double(onset.pascals()) +
                                    " Pa lies above the lowest calibration pressure");
  }

  CalibrationProfile profile;
  profile.name_ = std::move(name);
  profile.onset_ = onset;
  profile.points_ = std::move(merged);
  profile.log_ohms_.reserve(profile.points_.size());
  for (const auto& p : profile.points_) profile.log_ohms_.push_back(std::log(p.resistance.ohms()));

  // Goodness of fit against the raw rows in log space; 1 for pure interpolation.
  double mean = 0.0;
  for (const auto& p : points) mean += std::log(p.resistance.ohms());
  mean /= static_cast<double>(points.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (const auto& p : points) {
    const double y = std::log(p.resistance.ohms());
    const double fit = std::log(profile.static_resistance(p.pressure).ohms());
    ss_tot += (y - mean) * (y - mean);
    ss_res += (y - fit) * (y - fit);
  }
  profile.fit_r2_ = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return profile;
}

Resistance CalibrationProfile::static_resistance(Pressure p) const {
  if (p < onset_) return Resistance::open_circuit();
  if (p <= points_.front().pressure) return points_.front().resistance;
  if (p >= points_.back().pressure) return points_.back().resistance;

  const auto it = std::upper_bound(points_.begin(), points_.end(), p,
                                   [](Pressure v, const CalibrationPoint& pt) {
                                     return v < pt.pressure;
                                   });
  const std::size_t hi = static_cast<std::size_t>(it - points_.begin());
  const std::size_t lo = hi - 1;
  if (p == points_[lo].pressure) return points_[lo].resistance;

  const double p0 = points_[lo].pressure.pascals();
  const double p1 = points_[hi].pressure.pascals();
  const double t = (p.pascals() - p0) / (p1 - p0);
  const double a = log_ohms_[lo];
  const double b = log_ohms_[hi];
  // Anchored at the lower-resistance end so the value never undershoots b; the clamp
  // keeps adjacent segments ordered when rounding lands an ulp past a.
  const double log_r = std::clamp(b + (1.0 - t) * (a - b), b, a);
  return Resistance::ohms(std::exp(log_r));
}

Pressure CalibrationProfile::pressure_for(double ohms) const {
  if (ohms >= max_ohms()) return onset_;
  if (ohms <= min_ohms()) {
    // First pressure at which the curve bottoms out.
    for (const auto& pt : points_) {
      if (pt.resistance.ohms() <= ohms) return pt.pressure;
    }
    return max_pressure();
  }
  // Invariant: R(lo) > ohms >= R(hi).
  double lo = onset_.pascals();
  double hi = max_pressure().pascals();
  for (int i = 0; i < 2000; ++i) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    if (static_resistance(Pressure(mid)).ohms() > ohms) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double err_lo = std::abs(std::log(static_resistance(Pressure(lo)).ohms_or_inf() / ohms));
  const double err_hi = std::abs(std::log(static_resistance(Pressure(hi)).ohms() / ohms));
  return Pressure(err_lo < err_hi ? lo : hi);
}

namespace {

std::vector<CalibrationPoint> make_points(std::initializer_list<std::pair<double, double>> rows) {
  std::vector<CalibrationPoint> out;
  for (const auto& [p, r] : rows) out.push_back({Pressure(p), Resistance::ohms(r)});
  return out;
}

}  // namespace

CalibrationProfile table44_profile() {
  const auto pts = make_points({{428589.8, 3342900.0},
                                {428589.8, 3342900.0},
                                {428589.8, 3342900.0},
                                {469052.1, 1924700.0},
                                {480612.8, 1711436.842},
                                {486393.1, 1620800.0},
                                {509514.4, 1333783.333},
                                {532635.8, 1128771.429},
                                {723386.8, 463322.9508}});
  return fit_profile("table44", pts, Pressure(kDefaultOnsetPa));
}

CalibrationProfile specsheet_profile() {
  const auto pts = make_points({{200000.0, 150000.0}, {750000.0, 200.0}});
  return fit_profile("specsheet", pts, Pressure(kDefaultOnsetPa));
}

CalibrationProfile table43_profile() {
  const auto pts = make_points({{428589.8, 3342900.0}, {434370.1, 29162.12}});
  return fit_profile("table43", pts, Pressure(kDefaultOnsetPa));
}

CalibrationProfile fsr_reference_profile() {
  const auto pts = make_points({{428589.8, 3342900.0},
                                {450000.0, 2051325.0},
                                {500000.0, 2051325.0},
                                {600000.0, 123811.11}});
  return fit_profile("fsr", pts, Pressure(kDefaultOnsetPa));
}

std::optional<CalibrationProfile> builtin_profile(std::string_view name) {
  if (name == "table44") return table44_profile();
  if (name == "specsheet") return specsheet_profile();
  if (name == "table43") return table43_profile();
  if (name == "fsr") return fsr_reference_profile();
  return std::nullopt;
}

std::vector<std::string> builtin_profile_names() {
  return {"table44", "specsheet", "table43", "fsr"};
}

std::vector<CalibrationPoint> read_calibration_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<CalibrationPoint> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "pressure_pa,resistance_ohm") {
        throw ParseError(line_no, "expected header 'pressure_pa,resistance_ohm', got '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw ParseError(line_no, "expected 2 columns");
    try {
      out.push_back({Pressure(parse_double(cells[0])), Resistance::ohms(parse_double(cells[1]))});
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!header_seen) throw ParseError(line_no, "missing header 'pressure_pa,resistance_ohm'");
  return out;
}

void write_calibration_csv(std::span<const CalibrationPoint> points, const std::string& path) {
  std::ostringstream os;
  os << "pressure_pa,resistance_ohm\n";
  for (const auto& p : points) {
    os << format_double(p.pressure.pascals()) << ',' << format_double(p.resistance.ohms()) << '\n';
  }
  write_text_file(path, os.str());
}

std::string profile_to_json(const CalibrationProfile& profile) {
  nlohmann::ordered_json j;
  j["name"] = profile.name();
  j["onset_pa"] = profile.onset().pascals();
  j["fit_r2"] = profile.fit_r2();
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : profile.points()) {
    pts.push_back({p.pressure.pascals(), p.resistance.ohms()});
  }
  j["points"] = std::move(pts);
  return j.dump(2) + "\n";
}

CalibrationProfile profile_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    std::vector<CalibrationPoint> pts;
    for (const auto& row : j.at("points")) {
      pts.push_back({Pressure(row.at(0).get<double>()), Resistance::ohms(row.at(1).get<double>())});
    }
    return fit_profile(j.at("name").get<std::string>(), pts,
                       Pressure(j.at("onset_pa").get<double>()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("profile json: ") + e.what());
  }
}

CalibrationProfile load_profile(const std::string& name_or_path) {
  if (auto p = builtin_profile(name_or_path)) return *p;
  const std::filesystem::path path(name_or_path);
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::Config, "unknown profile '" + name_or_path +
                                       "' (not a built-in name or an existing file)");
  }
  if (path.extension() == ".json") return profile_from_json(read_text_file(name_or_path));
  const auto pts = read_calibration_csv(name_or_path);
  double lowest = kDefaultOnsetPa;
  for (const auto& p : pts) lowest = std::min(lowest, p.pressure.pascals());
  return fit_profile(path.stem().string(), pts, Pressure(lowest));
}

DynamicsConfig DynamicsConfig::for_profile(const CalibrationProfile& profile) {
  const double span = profile.max_pressure().pascals() - profile.onset().pascals();
  return DynamicsConfig{
      .tau_load_s = kResponseTime90_s / std::log(10.0),
      .tau_recover_s = kRecoveryTime90_s / std::log(10.0),
      .hysteresis_halfwidth_pa = kHysteresisFraction / 2.0 * span,
      .sample_period_s = 0.001,
  };
}

void DynamicsConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(tau_load_s) || !positive(tau_recover_s) || !positive(sample_period_s) ||
      !std::isfinite(hysteresis_halfwidth_pa) || hysteresis_halfwidth_pa < 0.0) {
    throw Error(ErrorKind::Config, "dynamics parameters must be positive");
  }
}

double play_operator(double previous_output, double input, double halfwidth) {
  return std::clamp(previous_output, std::max(0.0, input - halfwidth), input + halfwidth);
}

StepResult step(const SensorState& state, Pressure applied, double timestamp_s,
                const CalibrationProfile& profile, const DynamicsConfig& dynamics) {
  if (!(timestamp_s >= state.last_timestamp_s)) {
    throw Error(ErrorKind::Ordering, "sensor step at t=" + format_double(timestamp_s) +
                                         " s precedes previous t=" +
                                         format_double(state.last_timestamp_s) + " s");
  }
  const double dt = timestamp_s - state.last_timestamp_s;

  SensorState next;
  next.last_timestamp_s = timestamp_s;
  next.effective_pressure = Pressure(play_operator(state.effective_pressure.pascals(),
                                                   applied.pascals(),
                                                   dynamics.hysteresis_halfwidth_pa));

  const Resistance target = profile.static_resistance(next.effective_pressure);
  if (target.is_open()) {
    next.lagged_resistance = target;
  } else {
    const double current = state.lagged_resistance.is_open() ? profile.max_ohms()
                                                             : state.lagged_resistance.ohms();
    const double goal = target.ohms();
    const double tau = goal < current ? dynamics.tau_load_s : dynamics.tau_recover_s;
    next.lagged_resistance = Resistance::ohms(goal + (current - goal) * std::exp(-dt / tau));
  }
  return {next, next.lagged_resistance};
}

namespace {

SensorState settle(SensorState s, Pressure p, const CalibrationProfile& profile,
                   const DynamicsConfig& dynamics) {
  const double hold = 1000.0 * std::max(dynamics.tau_load_s, dynamics.tau_recover_s);
  return step(s, p, s.last_timestamp_s + hold, profile, dynamics).state;
}

}  // namespace

double measure_step_time(const CalibrationProfile& profile, const DynamicsConfig& dynamics,
                         Pressure from, Pressure to) {
  dynamics.validate();
  SensorState s = settle(SensorState{}, from, profile, dynamics);
  const double start = s.lagged_resistance.is_open() ? profile.max_ohms()
                                                     : s.lagged_resistance.ohms();
  const SensorState final_state = settle(s, to, profile, dynamics);
  if (final_state.lagged_resistance.is_open()) return 0.0;  // release below onset snaps
  const double goal = final_state.lagged_resistance.ohms();
  const double span = std::abs(goal - start);
  if (span == 0.0) return 0.0;

  const double t0 = s.last_timestamp_s;
  for (std::size_t k = 1; k < 1'000'000; ++k) {
    const double t = t0 + static_cast<double>(k) * dynamics.sample_period_s;
    s = step(s, to, t, profile, dynamics).state;
    // Relative slack so a crossing that lands exactly on a sample is not lost to rounding.
    if (std::abs(s.lagged_resistance.ohms() - goal) <= 0.1 * span * (1.0 + 1e-9)) {
      return static_cast<double>(k) * dynamics.sample_period_s;
    }
  }
  return std::numeric_limits<double>::infinity();
}

double measure_loop_width_pa(const CalibrationProfile& profile, const DynamicsConfig& dynamics,
                             Pressure lo, Pressure hi, std::size_t steps) {
  dynamics.validate();
  if (steps == 0 || !(hi > lo)) throw Error(ErrorKind::Range, "sweep needs hi > lo and steps > 0");
  auto at = [&](std::size_t i) {
    return Pressure(lo.pascals() + (hi.pascals() - lo.pascals()) * static_cast<double>(i) /
                                       static_cast<double>(steps));
  };
  std::vector<Resistance> up;
  std::vector<Resistance> down(steps + 1, Resistance::open_circuit());
  SensorState s;
  for (std::size_t i = 0; i <= steps; ++i) {
    s = settle(s, at(i), profile, dynamics);
    up.push_back(s.lagged_resistance);
  }
  for (std::size_t i = steps + 1; i-- > 0;) {
    s = settle(s, at(i), profile, dynamics);
    down[i] = s.lagged_resistance;
  }
  // Only points strictly inside the curve's range have a unique equivalent pressure.
  auto interior = [&](const Resistance& r) {
    return !r.is_open() && r.ohms() < profile.max_ohms() && r.ohms() > profile.min_ohms();
  };
  double width = 0.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    if (!interior(up[i]) || !interior(down[i])) continue;
    const double gap = profile.pressure_for(down[i].ohms()).pascals() -
                       profile.pressure_for(up[i].ohms()).pascals();
    width = std::max(width, std::abs(gap));
  }
  return width;
}

Characterization characterize(const CalibrationProfile& profile, const DynamicsConfig& dynamics) {
  Characterization c{};
  c.profile_name = profile.name();
  c.onset_pa = profile.onset().pascals();
  c.max_pressure_pa = profile.max_pressure().pascals();
  c.ohms_at_onset = profile.max_ohms();
  c.ohms_at_max = profile.min_ohms();
  const double dp = c.max_pressure_pa - c.onset_pa;
  const double dr = std::abs(c.ohms_at_onset - c.ohms_at_max);
  if (dr > 0.0) c.sensitivity_pa_per_ohm = dp / dr;
  c.sensitivity_ohm_per_pa = dp > 0.0 ? dr / dp : 0.0;
  c.reference_sensitivity_pa_per_ohm = kReferenceSensitivityPaPerOhm;
  c.sensitivity_discrepancy =
      !c.sensitivity_pa_per_ohm ||
      std::abs(*c.sensitivity_pa_per_ohm - kReferenceSensitivityPaPerOhm) >
          kThresholdBandPct / 100.0 * kReferenceSensitivityPaPerOhm;
  c.response_time_s = measure_step_time(profile, dynamics, Pressure(0.0), profile.max_pressure());
  c.recovery_time_s = measure_step_time(profile, dynamics, profile.max_pressure(), profile.onset());
  c.hysteresis_pct = dp > 0.0 ? 100.0 *
                                    measure_loop_width_pa(profile, dynamics, profile.onset(),
                                                          profile.max_pressure()) /
                                    dp
                              : 0.0;
  c.threshold_band_pct = kThresholdBandPct;
  c.fit_r2 = profile.fit_r2();
  return c;
}

std::string characterization_to_json(const Characterization& c) {
  nlohmann::ordered_json j;
  j["profile"] = c.profile_name;
  j["onset_pa"] = c.onset_pa;
  j["max_pressure_pa"] = c.max_pressure_pa;
  j["resistance_at_onset_ohm"] = c.ohms_at_onset;
  j["resistance_at_max_ohm"] = c.ohms_at_max;
  j["sensitivity_pa_per_ohm"] =
      c.sensitivity_pa_per_ohm ? nlohmann::ordered_json(*c.sensitivity_pa_per_ohm) : nullptr;
  j["sensitivity_ohm_per_pa"] = c.sensitivity_ohm_per_pa;
  j["reference_sensitivity_pa_per_ohm"] = c.reference_sensitivity_pa_per_ohm;
  j["sensitivity_discrepancy"] = c.sensitivity_discrepancy;
  j["response_time_s"] = c.response_time_s;
  j["recovery_time_s"] = c.recovery_time_s;
  j["hysteresis_pct"] = c.hysteresis_pct;
  j["threshold_band_pct"] = c.threshold_band_pct;
  j["fit_r2"] = c.fit_r2;
  return j.dump(2) + "\n";
}

}  // namespace solesense
