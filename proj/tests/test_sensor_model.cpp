#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "solesense/sensor_model.hpp"

using namespace solesense;

namespace {

const std::vector<std::pair<double, double>> kTable44 = {
    {428589.8, 3342900},          {428589.8, 3342900},          {428589.8, 3342900},
    {469052.1, 1924700},          {480612.8, 1711436.842},      {486393.1, 1620800},
    {509514.4, 1333783.333},      {532635.8, 1128771.429},      {723386.8, 463322.9508}};

std::vector<CalibrationPoint> points(const std::vector<std::pair<double, double>>& rows) {
  std::vector<CalibrationPoint> out;
  for (auto [p, r] : rows) out.push_back({Pressure(p), Resistance::ohms(r)});
  return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("table44 profile reproduces every calibration row") {
  const auto prof = fit_profile("t44", points(kTable44), Pressure(200'000.0));
  CHECK(prof.points().size() == 7);  // three duplicate rows merged
  for (auto [p, r] : kTable44) {
    CAPTURE(p);
    CHECK(rel(prof.static_resistance(Pressure(p)).ohms(), r) <= 1e-9);
  }
  CHECK(prof.static_resistance(Pressure(428589.8)).ohms() == 3'342'900.0);
  CHECK(prof.fit_r2() == doctest::Approx(1.0));
}

TEST_CASE("leave-one-out interpolation at 509514.4 Pa") {
  auto rows = kTable44;
  std::erase_if(rows, [](const auto& r) { return r.first == 509514.4; });
  const auto prof = fit_profile("loo", points(rows), Pressure(200'000.0));
  const double got = prof.static_resistance(Pressure(509514.4)).ohms();
  CHECK(got == doctest::Approx(1352595.34).epsilon(1e-8));
  CHECK(rel(got, 1333783.333) <= 0.15);
}

TEST_CASE("specsheet profile end points and log-linear midpoint") {
  const auto prof = specsheet_profile();
  CHECK(prof.static_resistance(Pressure(200'000.0)).ohms() == doctest::Approx(150'000.0).epsilon(1e-12));
  CHECK(prof.static_resistance(Pressure(750'000.0)).ohms() == doctest::Approx(200.0).epsilon(1e-12));
  CHECK(prof.static_resistance(Pressure(475'000.0)).ohms() ==
        doctest::Approx(std::exp((std::log(150000.0) + std::log(200.0)) / 2.0)).epsilon(1e-12));
  CHECK(prof.static_resistance(Pressure(475'000.0)).ohms() == doctest::Approx(5477.2256).epsilon(1e-8));
  CHECK(prof.static_resistance(Pressure(0.0)).is_open());
  CHECK(prof.static_resistance(Pressure(199'999.0)).is_open());
  CHECK(prof.static_resistance(Pressure(900'000.0)).ohms() == 200.0);
}

TEST_CASE("flat two-point profile") {
  const auto prof = fit_profile("flat", points({{300'000, 5000}, {600'000, 5000}}), Pressure(200'000.0));
  for (double p = 300'000; p <= 600'000; p += 25'000) {
    CHECK(prof.static_resistance(Pressure(p)).ohms() == doctest::Approx(5000.0).epsilon(1e-12));
  }
  const auto c = characterize(prof, DynamicsConfig::for_profile(prof));
  CHECK(c.sensitivity_ohm_per_pa == 0.0);
  CHECK_FALSE(c.sensitivity_pa_per_ohm.has_value());
}

TEST_CASE("fit rejects bad data") {
  SUBCASE("single point") {
    CHECK_THROWS_AS(fit_profile("one", points({{469052.1, 1924700}}), Pressure(200'000.0)), Error);
  }
  SUBCASE("resistance rising with pressure names the pair") {
    try {
      fit_profile("bad", points({{400'000, 3e6}, {450'000, 2e6}, {500'000, 2.5e6}}), Pressure(200'000.0));
      FAIL("expected fit error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Fit);
      CHECK(std::string(e.what()).find("450000") != std::string::npos);
      CHECK(std::string(e.what()).find("500000") != std::string::npos);
    }
  }
  SUBCASE("onset above the data") {
    CHECK_THROWS_AS(fit_profile("o", points({{300'000, 5000}, {600'000, 100}}), Pressure(400'000.0)),
                    Error);
  }
}

TEST_CASE("built-in profiles") {
  CHECK(builtin_profile("table44").has_value());
  CHECK(builtin_profile("specsheet").has_value());
  CHECK(builtin_profile("table43").has_value());
  CHECK(builtin_profile("fsr").has_value());
  CHECK_FALSE(builtin_profile("nope").has_value());
  CHECK_THROWS_AS(load_profile("no-such-profile"), Error);

  const auto fsr = fsr_reference_profile();
  CHECK(fsr.static_resistance(Pressure(700'000.0)).ohms() == doctest::Approx(123'811.11).epsilon(1e-9));
  CHECK(fsr.static_resistance(Pressure(300'000.0)).ohms() == 3'342'900.0);
}

TEST_CASE("profile JSON and CSV round trip") {
  const auto prof = table44_profile();
  const auto back = profile_from_json(profile_to_json(prof));
  CHECK(back.name() == prof.name());
  CHECK(back.onset() == prof.onset());
  REQUIRE(back.points().size() == prof.points().size());
  for (std::size_t i = 0; i < prof.points().size(); ++i) {
    CHECK(back.points()[i].pressure == prof.points()[i].pressure);
    CHECK(back.points()[i].resistance == prof.points()[i].resistance);
  }
  const auto path = (std::filesystem::temp_directory_path() / "ss_cal_roundtrip.csv").string();
  write_calibration_csv(prof.points(), path);
  const auto pts = read_calibration_csv(path);
  REQUIRE(pts.size() == prof.points().size());
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(pts[i].resistance == prof.points()[i].resistance);
  std::filesystem::remove(path);
}

TEST_CASE("static resistance is non-increasing in pressure") {
  for (const auto& name : builtin_profile_names()) {
    const auto prof = *builtin_profile(name);
    CAPTURE(name);
    double prev = std::numeric_limits<double>::infinity();
    for (double p = 0; p <= 800'000; p += 137.0) {
      const double r = prof.static_resistance(Pressure(p)).ohms_or_inf();
      CHECK(r <= prev);
      prev = r;
    }
  }
}

TEST_CASE("pressure_for inverts static_resistance inside the range") {
  const auto prof = specsheet_profile();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(200'000.0, 750'000.0);
  for (int i = 0; i < 500; ++i) {
    const double p = dist(rng);
    const double r = prof.static_resistance(Pressure(p)).ohms();
    CHECK(prof.pressure_for(r).pascals() == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK(prof.pressure_for(1e9) == prof.onset());
  CHECK(prof.pressure_for(1.0).pascals() == 750'000.0);
}

TEST_CASE("dynamics time constants and hysteresis width") {
  const auto prof = specsheet_profile();
  const auto d = DynamicsConfig::for_profile(prof);
  CHECK(d.tau_load_s == doctest::Approx(0.0521153).epsilon(1e-6));
  CHECK(d.tau_recover_s == doctest::Approx(0.100 / std::log(10.0)).epsilon(1e-12));
  CHECK(d.hysteresis_halfwidth_pa == doctest::Approx(16'500.0).epsilon(1e-12));
}

TEST_CASE("first-order lag decays exactly exponentially") {
  const auto prof = specsheet_profile();
  const auto d = DynamicsConfig::for_profile(prof);
  SensorState s = SensorState::at(0.0);
  s = step(s, Pressure(300'000.0), 100.0, prof, d).state;  // settled
  const double r0 = s.lagged_resistance.ohms();
  const double p_applied = 600'000.0;
  const double goal =
      prof.static_resistance(Pressure(p_applied - d.hysteresis_halfwidth_pa)).ohms();
  for (double dt : {0.001, 0.01, 0.05, 0.2}) {
    const auto r = step(s, Pressure(p_applied), 100.0 + dt, prof, d);
    const double expected = goal + (r0 - goal) * std::exp(-dt / d.tau_load_s);
    CHECK(rel(r.resistance.ohms(), expected) <= 1e-12);
  }
}

TEST_CASE("long hold settles on the static value") {
  const auto prof = specsheet_profile();
  const auto d = DynamicsConfig::for_profile(prof);
  SensorState s = SensorState::at(0.0);
  const auto r = step(s, Pressure(500'000.0), 1e6, prof, d);
  CHECK(r.resistance.ohms() ==
        doctest::Approx(prof.static_resistance(r.state.effective_pressure).ohms()).epsilon(1e-12));
}

TEST_CASE("splitting a step does not change the result") {
  const auto prof = table44_profile();
  const auto d = DynamicsConfig::for_profile(prof);
  SensorState a = step(SensorState::at(0.0), Pressure(450'000.0), 5.0, prof, d).state;
  SensorState b = a;
  a = step(a, Pressure(520'000.0), 5.08, prof, d).state;
  b = step(b, Pressure(520'000.0), 5.03, prof, d).state;
  b = step(b, Pressure(520'000.0), 5.08, prof, d).state;
  CHECK(rel(a.lagged_resistance.ohms(), b.lagged_resistance.ohms()) <= 1e-12);
}

TEST_CASE("step rejects time going backwards") {
  const auto prof = specsheet_profile();
  const auto d = DynamicsConfig::for_profile(prof);
  const auto s = SensorState::at(2.0);
  try {
    step(s, Pressure(300'000.0), 1.0, prof, d);
    FAIL("expected ordering error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Ordering);
  }
}

TEST_CASE("play operator is rate independent and bounded") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 800'000.0);
  const double h = 16'500.0;
  double y = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double x = dist(rng);
    y = play_operator(y, x, h);
    CHECK(y >= x - h - 1e-9);
    CHECK(y <= x + h + 1e-9);
  }
  // Repeating the same input leaves the output unchanged.
  CHECK(play_operator(y, 123'456.0, h) == play_operator(play_operator(y, 123'456.0, h), 123'456.0, h));
}

TEST_CASE("release below onset reads open circuit immediately") {
  const auto prof = specsheet_profile();
  const auto d = DynamicsConfig::for_profile(prof);
  SensorState s = step(SensorState::at(0.0), Pressure(600'000.0), 1.0, prof, d).state;
  const auto r = step(s, Pressure(0.0), 1.001, prof, d);
  CHECK(r.resistance.is_open());
}

TEST_CASE("characterization figures") {
  const auto prof = specsheet_profile();
  const auto c = characterize(prof, DynamicsConfig::for_profile(prof));
  CHECK(c.ohms_at_onset == 150'000.0);
  CHECK(c.ohms_at_max == 200.0);
  REQUIRE(c.sensitivity_pa_per_ohm.has_value());
  CHECK(*c.sensitivity_pa_per_ohm == doctest::Approx(550'000.0 / 149'800.0).epsilon(1e-12));
  CHECK(*c.sensitivity_pa_per_ohm == doctest::Approx(3.67156).epsilon(1e-5));
  CHECK(c.sensitivity_discrepancy);
  CHECK(std::abs(c.response_time_s - 0.120) <= 0.005);
  CHECK(std::abs(c.recovery_time_s - 0.100) <= 0.005);
  CHECK(c.hysteresis_pct <= 6.0 * (1.0 + 1e-9));
}

TEST_CASE("step to 436 kPa settles within 10% in 120 ms at 1 kHz") {
  const auto prof = specsheet_profile();
  const auto d = DynamicsConfig::for_profile(prof);
  CHECK(measure_step_time(prof, d, Pressure(0.0), Pressure(436'000.0)) <= 0.120 + 1e-12);
}

TEST_CASE("triangular sweep loop width") {
  const auto prof = specsheet_profile();
  const auto d = DynamicsConfig::for_profile(prof);
  const double w = measure_loop_width_pa(prof, d, Pressure(200'000.0), Pressure(750'000.0));
  CHECK(w / 550'000.0 <= 0.06 * (1.0 + 1e-9));
  CHECK(w > 0.0);
}
