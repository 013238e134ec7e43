#include <doctest.h>

#include <cmath>

#include "solesense/gait_synth.hpp"

using namespace solesense;

TEST_CASE("default timeline boundaries") {
  const auto tl = default_timeline(0.6);
  CHECK(tl.span(GaitPhase::Swing).start == doctest::Approx(0.60));
  CHECK(tl.span(GaitPhase::Swing).end == 1.0);
  CHECK(tl.span(GaitPhase::MidStance).start == doctest::Approx(0.12));
  CHECK(tl.span(GaitPhase::MidStance).end == doctest::Approx(0.31));
  const auto half = default_timeline(0.5);
  CHECK(half.span(GaitPhase::InitialContact).start == 0.0);
  CHECK(half.span(GaitPhase::InitialContact).end == doctest::Approx(0.02 * 0.5 / 0.6).epsilon(1e-12));
  CHECK_THROWS_AS(default_timeline(1.2), Error);
  CHECK_THROWS_AS(default_timeline(0.0), Error);
}

TEST_CASE("timeline spans tile the cycle in cyclic order") {
  for (double sf : {0.3, 0.5, 0.6, 0.75, 0.9}) {
    const auto tl = default_timeline(sf);
    CHECK(tl.spans.front().start == 0.0);
    CHECK(tl.spans.back().end == 1.0);
    for (std::size_t i = 0; i + 1 < kPhaseCount; ++i) {
      CHECK(tl.spans[i].end == tl.spans[i + 1].start);
      CHECK(next_phase(tl.spans[i].phase) == tl.spans[i + 1].phase);
      CHECK(tl.spans[i].end > tl.spans[i].start);
    }
    CHECK(tl.phase_at(sf) == GaitPhase::Swing);
    CHECK(tl.phase_at(0.0) == GaitPhase::InitialContact);
  }
}

TEST_CASE("phase names") {
  for (auto p : kAllPhases) CHECK(phase_from_name(phase_name(p)) == p);
  CHECK_FALSE(phase_from_name("Jogging").has_value());
  CHECK(next_phase(GaitPhase::Swing) == GaitPhase::InitialContact);
}

TEST_CASE("sample count and cycle duration") {
  GaitParams p;
  CHECK(p.cycle_duration_s() == 1.0);
  CHECK(p.sample_count() == 1000);
  CHECK(synthesize(p).size() == 1000);
  p.cycles = 0;
  CHECK(synthesize(p).empty());
}

TEST_CASE("regional peaks for a 70 kg walker") {
  GaitParams p;
  GaitSynthesizer g(p);
  CHECK(g.reference_pressure_pa() == doctest::Approx(549'360.0).epsilon(1e-12));
  const auto heel = g.envelope(0.03);
  CHECK(heel[index_of(SoleChannel::Heel)] == doctest::Approx(549'360.0).epsilon(1e-12));
  const auto fore = g.envelope(0.53);
  CHECK(fore[index_of(SoleChannel::Forefoot)] == doctest::Approx(604'296.0).epsilon(1e-12));
  const auto mid = g.envelope(0.25);
  CHECK(mid[index_of(SoleChannel::MidfootCentral)] == doctest::Approx(64'092.0).epsilon(1e-12));
  // Unscaled heel load would exceed the sensor's 750 kPa range.
  CHECK(pressure_from_force(force_from_mass(70.0)).pascals() > 750'000.0);
}

TEST_CASE("swing samples are exactly zero without noise") {
  GaitParams p;
  p.cycles = 3;
  const auto tl = default_timeline(p.stance_fraction);
  for (const auto& s : synthesize(p)) {
    const double u = std::fmod(s.timestamp_s, p.cycle_duration_s()) / p.cycle_duration_s();
    if (tl.phase_at(u) == GaitPhase::Swing) {
      for (auto c : kAllChannels) CHECK(s[c].pascals() == 0.0);
    }
  }
}

TEST_CASE("ground truth records") {
  GaitParams p;
  const auto gt = ground_truth(p);
  REQUIRE(gt.size() == 60);
  CHECK(gt[5].phase == GaitPhase::Swing);
  CHECK(gt[5].start_s == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(gt[5].end_s == doctest::Approx(1.0).epsilon(1e-12));
  const auto tl = default_timeline(p.stance_fraction);
  for (const auto& r : gt) {
    const auto& span = tl.span(r.phase);
    CHECK(std::abs(r.start_s - (r.cycle + span.start) * p.cycle_duration_s()) <= 1e-9);
    CHECK(std::abs(r.end_s - (r.cycle + span.end) * p.cycle_duration_s()) <= 1e-9);
  }
}

TEST_CASE("same seed, same stream") {
  GaitParams p;
  p.noise_sigma_pa = 5000.0;
  p.seed = 99;
  p.cycles = 4;
  CHECK(synthesize(p) == synthesize(p));
  auto q = p;
  q.seed = 100;
  CHECK_FALSE(synthesize(p) == synthesize(q));
  for (const auto& s : synthesize(p)) {
    for (auto c : kAllChannels) CHECK(s[c].pascals() >= 0.0);
  }
}

TEST_CASE("timestamps survive a millisecond round trip") {
  GaitParams p;
  p.cycles = 20;
  for (const auto& s : synthesize(p)) {
    const auto ms = std::llround(s.timestamp_s * 1000.0);
    REQUIRE(static_cast<double>(ms) / 1000.0 == s.timestamp_s);
  }
}

TEST_CASE("invalid parameters") {
  GaitParams p;
  p.stance_fraction = 1.2;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.cadence_spm = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.noise_sigma_pa = -1.0;
  CHECK_THROWS_AS(GaitSynthesizer{p}, Error);
}
