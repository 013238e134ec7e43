#pragma once

#include <cstdint>

#include "solesense/sensor_model.hpp"
#include "solesense/units.hpp"

namespace solesense {

// Sensor as R2 with V_out measured across it; R1 is the fixed series resistor.
// An unloaded (open) sensor reads the full rail.
struct DividerConfig {
  double v_in = 3.3;          // divider/ADC rail (regulated)
  double r1_ohm = 150'000.0;  // fixed series resistor
  int adc_bits = 12;
  double v_ref = 3.3;
  double battery_v = 3.7;     // pack voltage; metadata only

  void validate() const;
  std::uint32_t full_scale() const noexcept { return (1u << adc_bits) - 1u; }
};

struct AdcCount {
  std::uint32_t value = 0;
  auto operator<=>(const AdcCount&) const = default;
};

Voltage divider_out(const Resistance& r2, const DividerConfig& cfg);

// 0 V signals a short (saturation) and throws Range, as does any voltage outside
// [0, v_in]. v_in maps back to an open circuit.
Resistance invert_divider(Voltage v_out, const DividerConfig& cfg);

AdcCount quantize(Voltage v, const DividerConfig& cfg);
// Mid-rise reconstruction: (c + 0.5) * v_ref / 2^bits.
Voltage dequantize(AdcCount c, const DividerConfig& cfg);

// Worst-case current through one divider (sensor shorted).
double max_divider_current_a(const DividerConfig& cfg);

AdcCount pressure_to_count(Pressure p, const CalibrationProfile& profile, const DividerConfig& cfg);
AdcCount resistance_to_count(const Resistance& r, const DividerConfig& cfg);

struct PressureReading {
  Pressure pressure;
  bool below_onset = false;  // count reads above the profile's idle resistance
  bool saturated = false;    // count reads below the profile's minimum resistance
};

// Inverse of pressure_to_count. For every count that pressure_to_count can produce,
// pressure_to_count(count_to_pressure(c)) == c.
PressureReading count_to_pressure(AdcCount c, const CalibrationProfile& profile,
                                  const DividerConfig& cfg);

}  // namespace solesense
