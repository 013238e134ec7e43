#include <doctest.h>

#include <cmath>
#include <random>

#include "solesense/acquisition.hpp"

using namespace solesense;

TEST_CASE("divider output") {
  const DividerConfig cfg;
  CHECK(divider_out(Resistance::ohms(150'000.0), cfg).volts() == doctest::Approx(1.65).epsilon(1e-12));
  CHECK(divider_out(Resistance::ohms(200.0), cfg).volts() == doctest::Approx(3.3 * 200 / 150'200).epsilon(1e-12));
  CHECK(divider_out(Resistance::ohms(200.0), cfg).volts() == doctest::Approx(0.0043941).epsilon(1e-4));
  CHECK(divider_out(Resistance::open_circuit(), cfg).volts() == 3.3);
}

TEST_CASE("divider inversion") {
  const DividerConfig cfg;
  CHECK(invert_divider(Voltage(1.65), cfg).ohms() == doctest::Approx(150'000.0).epsilon(1e-12));
  CHECK(invert_divider(Voltage(3.3), cfg).is_open());
  for (double r : {200.0, 29'162.12, 3'342'900.0}) {
    CAPTURE(r);
    const double back = invert_divider(divider_out(Resistance::ohms(r), cfg), cfg).ohms();
    CHECK(std::abs(back - r) / r <= 1e-9);
  }
  CHECK_THROWS_AS(invert_divider(Voltage(0.0), cfg), Error);
  CHECK_THROWS_AS(invert_divider(Voltage(3.4), cfg), Error);
}

TEST_CASE("divider round trip over random resistances") {
  const DividerConfig cfg;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(200.0, 3.4e6);
  for (int i = 0; i < 10'000; ++i) {
    const double r = dist(rng);
    const double back = invert_divider(divider_out(Resistance::ohms(r), cfg), cfg).ohms();
    REQUIRE(std::abs(back - r) / r <= 1e-9);
  }
}

TEST_CASE("quantizer") {
  const DividerConfig cfg;
  CHECK(quantize(Voltage(0.0), cfg).value == 0);
  CHECK(quantize(Voltage(1.65), cfg).value == 2048);
  CHECK(quantize(Voltage(3.3), cfg).value == 4095);
  CHECK(dequantize(AdcCount{0}, cfg).volts() == 0.00040283203125);
  CHECK(dequantize(AdcCount{4095}, cfg).volts() == 3.29959716796875);
  CHECK_THROWS_AS(dequantize(AdcCount{4096}, cfg), Error);
}

TEST_CASE("quantize inverts dequantize on every code") {
  for (int bits : {8, 10, 12, 16}) {
    DividerConfig cfg;
    cfg.adc_bits = bits;
    for (std::uint32_t c = 0; c <= cfg.full_scale(); ++c) {
      REQUIRE(quantize(dequantize(AdcCount{c}, cfg), cfg).value == c);
    }
  }
}

TEST_CASE("divider current stays under 1 mA with defaults") {
  CHECK(max_divider_current_a(DividerConfig{}) == doctest::Approx(2.2e-5).epsilon(1e-12));
  CHECK(max_divider_current_a(DividerConfig{}) <= 1e-3);
}

TEST_CASE("invalid divider configuration") {
  DividerConfig cfg;
  cfg.r1_ohm = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.adc_bits = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("specsheet chain at 750 kPa lands on count 5") {
  const auto prof = specsheet_profile();
  CHECK(pressure_to_count(Pressure(750'000.0), prof, DividerConfig{}).value == 5);
  CHECK(pressure_to_count(Pressure(0.0), prof, DividerConfig{}).value == 4095);
}

TEST_CASE("counts are non-decreasing as pressure falls") {
  const DividerConfig cfg;
  for (const auto& prof : {specsheet_profile(), table44_profile()}) {
    std::uint32_t prev = 0;
    for (double p = prof.max_pressure().pascals(); p >= prof.onset().pascals(); p -= 250.0) {
      const auto c = pressure_to_count(Pressure(p), prof, cfg).value;
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("count_to_pressure is idempotent under the forward path") {
  const DividerConfig cfg;
  for (const auto& prof : {specsheet_profile(), table44_profile(), table43_profile(), fsr_reference_profile()}) {
    CAPTURE(prof.name());
    for (std::uint32_t c = 0; c <= cfg.full_scale(); ++c) {
      const auto reading = count_to_pressure(AdcCount{c}, prof, cfg);
      const auto again = pressure_to_count(reading.pressure, prof, cfg);
      // Codes inside the curve's range, and the idle code, map back onto themselves.
      if (c == cfg.full_scale() || (!reading.below_onset && !reading.saturated)) {
        REQUIRE(again.value == c);
      }
    }
  }
}

TEST_CASE("random pressures round trip within one ADC step") {
  const DividerConfig cfg;
  const auto prof = specsheet_profile();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(prof.onset().pascals(), prof.max_pressure().pascals());
  const double levels = std::ldexp(1.0, cfg.adc_bits);
  for (int i = 0; i < 1000; ++i) {
    const double p = dist(rng);
    const auto c = pressure_to_count(Pressure(p), prof, cfg);
    const double back = count_to_pressure(c, prof, cfg).pressure.pascals();
    REQUIRE(pressure_to_count(Pressure(back), prof, cfg) == c);
    // Pressure span of this code's voltage bin.
    auto bin_edge = [&](double code) {
      const double v = std::clamp(code * cfg.v_ref / levels, 1e-12, cfg.v_in - 1e-12);
      return prof.pressure_for(cfg.r1_ohm * v / (cfg.v_in - v)).pascals();
    };
    const double width = std::abs(bin_edge(c.value) - bin_edge(c.value + 1.0));
    CHECK(std::abs(back - p) <= width * (1.0 + 1e-9) + 1e-6);
  }
}

TEST_CASE("readings flag saturation and idle") {
  const DividerConfig cfg;
  const auto prof = specsheet_profile();
  const auto idle = count_to_pressure(AdcCount{4095}, prof, cfg);
  CHECK(idle.below_onset);
  CHECK(idle.pressure.pascals() == 0.0);
  const auto sat = count_to_pressure(AdcCount{0}, prof, cfg);
  CHECK(sat.saturated);
  CHECK(sat.pressure.pascals() == 750'000.0);
}
