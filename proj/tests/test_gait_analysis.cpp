#include <doctest.h>

#include <cmath>
#include <limits>

#include "solesense/gait_analysis.hpp"

using namespace solesense;

namespace {

PressureSample sample(double t, double fore, double mid, double heel) {
  PressureSample s;
  s.timestamp_s = t;
  s.channels[index_of(SoleChannel::Forefoot)] = Pressure(fore);
  s.channels[index_of(SoleChannel::MidfootMedial)] = Pressure(mid);
  s.channels[index_of(SoleChannel::MidfootCentral)] = Pressure(mid);
  s.channels[index_of(SoleChannel::MidfootLateral)] = Pressure(mid);
  s.channels[index_of(SoleChannel::Heel)] = Pressure(heel);
  return s;
}

GaitParams walk(std::uint32_t cycles = 20) {
  GaitParams p;
  p.cycles = cycles;
  return p;
}

}  // namespace

TEST_CASE("contact detection") {
  const AnalysisConfig cfg;
  CHECK_FALSE(contact_state(sample(0, 0, 0, 0), cfg).any());
  const auto heel = contact_state(sample(0, 0, 0, 549'000), cfg);
  CHECK(heel.heel_on);
  CHECK_FALSE(heel.midfoot_on);
  CHECK_FALSE(heel.forefoot_on);
}

TEST_CASE("dithering inside the hysteresis band never toggles") {
  const AnalysisConfig cfg;
  for (bool start : {false, true}) {
    ContactState st;
    st.heel_on = start;
    for (int i = 0; i < 200; ++i) {
      st = contact_state(sample(i, 0, 0, i % 2 ? 19'000 : 21'000), cfg, st);
      REQUIRE(st.heel_on == start);
    }
  }
  ContactState st;
  st = contact_state(sample(0, 0, 0, 22'000), cfg, st);
  CHECK(st.heel_on);
  st = contact_state(sample(0, 0, 0, 18'000), cfg, st);
  CHECK_FALSE(st.heel_on);
}

TEST_CASE("schmitt trigger on a slow ramp switches exactly once each way") {
  const AnalysisConfig cfg;
  ContactState st;
  int switches = 0;
  bool prev = false;
  for (int i = 0; i <= 400; ++i) {
    const double p = i <= 200 ? i * 200.0 : (400 - i) * 200.0;
    st = contact_state(sample(i, 0, 0, p), cfg, st);
    if (st.heel_on != prev) ++switches;
    prev = st.heel_on;
  }
  CHECK(switches == 2);
}

TEST_CASE("phase classification rules") {
  const AnalysisConfig cfg;
  ContactState none;
  ContactState heel{true, false, false};
  ContactState fore{false, false, true};
  ContactState fore_mid{false, true, true};
  ContactState heel_mid{true, true, false};
  CHECK(classify_phase(none, GaitPhase::MidStance, 0.0, cfg) == GaitPhase::Swing);
  CHECK(classify_phase(heel, GaitPhase::Swing, 0.0, cfg) == GaitPhase::InitialContact);
  CHECK(classify_phase(fore, GaitPhase::TerminalStance, 0.0, cfg) == GaitPhase::PreSwing);
  CHECK(classify_phase(fore_mid, GaitPhase::MidStance, 0.0, cfg) == GaitPhase::TerminalStance);
  CHECK(classify_phase(heel_mid, GaitPhase::InitialContact, 0.0, cfg) == GaitPhase::LoadingResponse);
  CHECK(classify_phase(heel, GaitPhase::InitialContact, 0.01, cfg) == GaitPhase::InitialContact);
  CHECK(classify_phase(heel, GaitPhase::InitialContact, 0.03, cfg) == GaitPhase::LoadingResponse);
  CHECK(classify_phase(heel_mid, GaitPhase::LoadingResponse, 0.05, cfg) == GaitPhase::MidStance);
}

TEST_CASE("transition legality follows the cyclic order") {
  for (auto p : kAllPhases) {
    CHECK(is_legal_transition(p, p));
    CHECK(is_legal_transition(p, next_phase(p)));
    CHECK_FALSE(is_legal_transition(p, next_phase(next_phase(p))));
  }
}

TEST_CASE("zero-noise walk matches the oracle") {
  const auto params = walk();
  const auto samples = synthesize(params);
  const auto result = analyze(samples);
  const auto& r = result.report;
  CHECK(r.heel_strikes == 20);
  CHECK(r.toe_offs == 20);
  CHECK(r.cycles == 19);
  CHECK(std::abs(r.cadence_spm - 120.0) / 120.0 <= 0.01);
  CHECK(std::abs(r.stance_fraction_mean - 0.6) <= 0.02);
  CHECK(r.phase_sequence_violations == 0);

  const auto gt = ground_truth(params);
  const double period = 1.0 / params.sample_rate_hz;
  std::vector<double> hs, to;
  for (const auto& e : result.events) {
    if (e.kind == GaitEventKind::HeelStrike) hs.push_back(e.timestamp_s);
    if (e.kind == GaitEventKind::ToeOff) to.push_back(e.timestamp_s);
  }
  std::vector<double> gt_hs, gt_to;
  for (const auto& g : gt) {
    if (g.phase == GaitPhase::InitialContact) gt_hs.push_back(g.start_s);
    if (g.phase == GaitPhase::Swing) gt_to.push_back(g.start_s);
  }
  REQUIRE(hs.size() == gt_hs.size());
  REQUIRE(to.size() == gt_to.size());
  for (std::size_t i = 0; i < hs.size(); ++i) CHECK(std::abs(hs[i] - gt_hs[i]) <= 1.5 * period);
  for (std::size_t i = 0; i < to.size(); ++i) CHECK(std::abs(to[i] - gt_to[i]) <= 1.5 * period);
}

TEST_CASE("first cycle phase sequence") {
  auto params = walk(1);
  const auto result = analyze(synthesize(params));
  std::vector<GaitPhase> seq;
  for (const auto& e : result.events) seq.push_back(e.phase);
  const std::vector<GaitPhase> expected = {GaitPhase::InitialContact, GaitPhase::LoadingResponse,
                                           GaitPhase::MidStance,      GaitPhase::TerminalStance,
                                           GaitPhase::PreSwing,       GaitPhase::Swing};
  CHECK(seq == expected);
  REQUIRE(result.events.size() == 6);
  CHECK(result.events[0].kind == GaitEventKind::HeelStrike);
  CHECK(result.events[0].timestamp_s == doctest::Approx(0.01));
  CHECK(result.events[5].kind == GaitEventKind::ToeOff);
  CHECK(result.events[5].timestamp_s == doctest::Approx(0.60));
}

TEST_CASE("noisy walk keeps cadence") {
  auto params = walk();
  params.noise_sigma_pa = 5000.0;
  params.seed = 7;
  const auto r = analyze(synthesize(params)).report;
  CHECK(std::abs(r.cadence_spm - 120.0) / 120.0 <= 0.02);
}

TEST_CASE("cadence and stance follow the parameters") {
  for (double cadence : {90.0, 100.0, 140.0}) {
    for (double stance : {0.55, 0.62}) {
      auto params = walk(12);
      params.cadence_spm = cadence;
      params.stance_fraction = stance;
      const auto r = analyze(synthesize(params)).report;
      CAPTURE(cadence);
      CAPTURE(stance);
      CHECK(std::abs(r.cadence_spm - cadence) / cadence <= 0.01);
      CHECK(std::abs(r.stance_fraction_mean - stance) <= 0.02);
      CHECK(r.phase_sequence_violations == 0);
    }
  }
}

TEST_CASE("empty stream") {
  const auto result = analyze({});
  CHECK(result.events.empty());
  CHECK(result.report.cycles == 0);
  CHECK(result.report.cadence_spm == 0.0);
}

TEST_CASE("single heel burst gives one heel strike and no cycle") {
  std::vector<PressureSample> s;
  for (int i = 0; i < 30; ++i) {
    const double heel = (i >= 5 && i < 15) ? 300'000.0 : 0.0;
    s.push_back(sample(i * 0.01, 0, 0, heel));
  }
  const auto r = analyze(s).report;
  CHECK(r.heel_strikes == 1);
  CHECK(r.cycles == 0);
}

TEST_CASE("analyzer rejects non-increasing timestamps") {
  GaitAnalyzer a;
  a.push(sample(0.0, 0, 0, 0));
  CHECK_THROWS_AS(a.push(sample(0.0, 0, 0, 0)), Error);
}

TEST_CASE("feeding in pieces equals feeding the whole stream") {
  auto params = walk(6);
  params.noise_sigma_pa = 3000.0;
  params.seed = 1;
  const auto samples = synthesize(params);
  const auto whole = analyze(samples);
  for (std::size_t split : {std::size_t{1}, std::size_t{137}, samples.size() / 2, samples.size() - 1}) {
    GaitAnalyzer a;
    std::vector<GaitEvent> events;
    for (std::size_t i = 0; i < split; ++i) a.push(samples[i], events);
    GaitAnalyzer b = a;  // checkpoint in the middle
    for (std::size_t i = split; i < samples.size(); ++i) b.push(samples[i], events);
    CHECK(events == whole.events);
    CHECK(b.report() == whole.report);
  }
}

TEST_CASE("report JSON round trip") {
  const auto r = analyze(synthesize(walk(5))).report;
  CHECK(report_from_json(report_to_json(r)) == r);
  CHECK(report_to_json(r) == report_to_json(report_from_json(report_to_json(r))));
}

TEST_CASE("events have strictly increasing timestamps") {
  const auto result = analyze(synthesize(walk(8)));
  for (std::size_t i = 1; i < result.events.size(); ++i) {
    CHECK(result.events[i].timestamp_s > result.events[i - 1].timestamp_s);
  }
}

TEST_CASE("comparison reproduces the published resistance columns") {
  const auto rows = compare_sensors(builtin_comparison_stimulus(), table43_profile(), fsr_reference_profile());
  const std::vector<double> sensor = {3342.9,   3342.9,   3342.9,   3342.9,   3342.9,
                                      29.16212, 29.16212, 29.16212, 29.16212, 29.16212,
                                      3342.9,   3342.9,   3342.9,   3342.9};
  const std::vector<double> fsr = {3342.9,    3342.9,    3342.9, 3342.9, 123.81111, 123.81111, 123.81111,
                                   3342.9,    3342.9,    3342.9, 3342.9, 2051.325,  2051.325,  2051.325};
  REQUIRE(rows.size() == 14);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CAPTURE(i);
    CHECK(rows[i].time_s == static_cast<double>(i));
    CHECK(std::abs(rows[i].sensor.ohms() / 1000.0 - sensor[i]) / sensor[i] <= 1e-6);
    CHECK(std::abs(rows[i].fsr.ohms() / 1000.0 - fsr[i]) / fsr[i] <= 1e-6);
  }
}

TEST_CASE("zero stimulus leaves both sensors idle") {
  std::vector<StimulusRow> zero;
  for (int t = 0; t < 14; ++t) zero.push_back({static_cast<double>(t), Pressure(0.0), Pressure(0.0)});
  const auto rows = compare_sensors(zero, table43_profile(), fsr_reference_profile());
  for (const auto& r : rows) {
    CHECK(r.sensor.is_open());
    CHECK(r.fsr.is_open());
  }
  CHECK(comparison_to_csv(rows).find("open,open") != std::string::npos);
}
