#include "solesense/acquisition.hpp"

#include <cmath>
#include <string>

#include "text_util.hpp"

namespace solesense {

void DividerConfig::validate() const {
  if (!(std::isfinite(v_in) && v_in > 0.0)) throw Error(ErrorKind::Config, "v_in must be > 0");
  if (!(std::isfinite(v_ref) && v_ref > 0.0)) throw Error(ErrorKind::Config, "v_ref must be > 0");
  if (!(std::isfinite(r1_ohm) && r1_ohm > 0.0)) throw Error(ErrorKind::Config, "r1 must be > 0");
  if (adc_bits < 1 || adc_bits > 24) throw Error(ErrorKind::Config, "adc_bits must be in [1, 24]");
}

Voltage divider_out(const Resistance& r2, const DividerConfig& cfg) {
  if (r2.is_open()) return Voltage(cfg.v_in);
  const double r = r2.ohms();
  return Voltage(cfg.v_in * r / (cfg.r1_ohm + r));
}

Resistance invert_divider(Voltage v_out, const DividerConfig& cfg) {
  const double v = v_out.volts();
  if (v > cfg.v_in) {
    throw Error(ErrorKind::Range, "divider output " + format_double(v) + " V exceeds v_in " +
                                      format_double(cfg.v_in) + " V");
  }
  if (v == cfg.v_in) return Resistance::open_circuit();
  if (v == 0.0) throw Error(ErrorKind::Range, "divider output 0 V: sensor shorted (saturated)");
  return Resistance::ohms(cfg.r1_ohm * v / (cfg.v_in - v));
}

AdcCount quantize(Voltage v, const DividerConfig& cfg) {
  const double levels = std::ldexp(1.0, cfg.adc_bits);
  const double code = std::floor(v.volts() / cfg.v_ref * levels);
  if (code <= 0.0) return {0};
  if (code >= static_cast<double>(cfg.full_scale())) return {cfg.full_scale()};
  return {static_cast<std::uint32_t>(code)};
}

Voltage dequantize(AdcCount c, const DividerConfig& cfg) {
  if (c.value > cfg.full_scale()) {
    throw Error(ErrorKind::Range, "ADC count " + std::to_string(c.value) + " exceeds full scale");
  }
  return Voltage((static_cast<double>(c.value) + 0.5) * cfg.v_ref / std::ldexp(1.0, cfg.adc_bits));
}

double max_divider_current_a(const DividerConfig& cfg) { return cfg.v_in / cfg.r1_ohm; }

AdcCount resistance_to_count(const Resistance& r, const DividerConfig& cfg) {
  return quantize(divider_out(r, cfg), cfg);
}

AdcCount pressure_to_count(Pressure p, const CalibrationProfile& profile, const DividerConfig& cfg) {
  return resistance_to_count(profile.static_resistance(p), cfg);
}

PressureReading count_to_pressure(AdcCount c, const CalibrationProfile& profile,
                                  const DividerConfig& cfg) {
  const Voltage v = dequantize(c, cfg);
  if (v.volts() >= cfg.v_in) return {Pressure(0.0), true, false};
  const Resistance r = invert_divider(v, cfg);
  const double ohms = r.ohms();

  if (ohms > profile.max_ohms()) {
    // The bin centre lies above the idle resistance; the bin still holds onset if the
    // forward path lands here.
    if (pressure_to_count(profile.onset(), profile, cfg) == c) return {profile.onset(), false, false};
    return {Pressure(0.0), true, false};
  }
  if (ohms < profile.min_ohms()) {
    return {profile.pressure_for(profile.min_ohms()), false, true};
  }
  return {profile.pressure_for(ohms), false, false};
}

}  // namespace solesense
