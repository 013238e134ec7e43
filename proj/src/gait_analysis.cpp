#include "solesense/gait_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"

namespace solesense {

std::array<double, kRegionCount> regional_pressure(const PressureSample& sample,
                                                   RegionReduction reduction) {
  std::array<double, kRegionCount> out{};
  std::array<int, kRegionCount> n{};
  for (auto c : kAllChannels) {
    const std::size_t r = index_of(region_of(c));
    const double p = sample[c].pascals();
    if (reduction == RegionReduction::Max) {
      out[r] = std::max(out[r], p);
    } else {
      out[r] += p;
    }
    ++n[r];
  }
  if (reduction == RegionReduction::Mean) {
    for (std::size_t r = 0; r < kRegionCount; ++r) out[r] /= n[r];
  }
  return out;
}

ContactState contact_state(const PressureSample& sample, const AnalysisConfig& config,
                           const ContactState& previous) {
  const auto p = regional_pressure(sample, config.reduction);
  auto schmitt = [&](SoleRegion r, bool was_on) {
    const double v = p[index_of(r)];
    if (v >= config.on_threshold(r)) return true;
    if (v <= config.off_threshold(r)) return false;
    return was_on;
  };
  return ContactState{
      .heel_on = schmitt(SoleRegion::Heel, previous.heel_on),
      .midfoot_on = schmitt(SoleRegion::Midfoot, previous.midfoot_on),
      .forefoot_on = schmitt(SoleRegion::Forefoot, previous.forefoot_on),
  };
}

namespace {

// Phase read from the contacts alone once the heel has lifted.
GaitPhase heel_off_phase(const ContactState& s) {
  if (s.midfoot_on && s.forefoot_on) return GaitPhase::TerminalStance;
  if (s.midfoot_on) return GaitPhase::MidStance;
  return GaitPhase::PreSwing;
}

}  // namespace

GaitPhase classify_phase(const ContactState& s, GaitPhase previous, double since_heel_strike_s,
                         const AnalysisConfig& config) {
  if (!s.any()) return GaitPhase::Swing;
  if (!s.heel_on) return heel_off_phase(s);

  switch (previous) {
    case GaitPhase::Swing:
      return GaitPhase::InitialContact;
    case GaitPhase::InitialContact:
      if (s.midfoot_on || since_heel_strike_s >= config.loading_dwell_s) {
        return GaitPhase::LoadingResponse;
      }
      return GaitPhase::InitialContact;
    case GaitPhase::LoadingResponse:
      return s.midfoot_on ? GaitPhase::MidStance : GaitPhase::LoadingResponse;
    default:
      // Heel contact after the heel has lifted: treat as (re)flattened foot.
      return GaitPhase::MidStance;
  }
}

bool is_legal_transition(GaitPhase from, GaitPhase to) noexcept {
  return from == to || next_phase(from) == to;
}

std::string_view event_kind_name(GaitEventKind k) noexcept {
  switch (k) {
    case GaitEventKind::HeelStrike: return "HeelStrike";
    case GaitEventKind::ToeOff: return "ToeOff";
    case GaitEventKind::PhaseTransition: return "PhaseTransition";
  }
  return "?";
}

std::optional<GaitEventKind> event_kind_from_name(std::string_view name) noexcept {
  for (auto k : {GaitEventKind::HeelStrike, GaitEventKind::ToeOff, GaitEventKind::PhaseTransition}) {
    if (event_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

GaitAnalyzer::GaitAnalyzer(AnalysisConfig config) : config_(config) {}

std::vector<GaitEvent> GaitAnalyzer::push(const PressureSample& sample) {
  std::vector<GaitEvent> events;
  push(sample, events);
  return events;
}

void GaitAnalyzer::push(const PressureSample& sample, std::vector<GaitEvent>& events) {
  const double t = sample.timestamp_s;
  if (!std::isfinite(t) || (samples_ > 0 && !(t > last_t_))) {
    throw IndexedError(ErrorKind::Ordering, samples_,
                       "sample timestamp " + format_double(t) + " s does not follow " +
                           format_double(last_t_) + " s");
  }
  last_t_ = t;
  ++samples_;

  const auto regional = regional_pressure(sample, config_.reduction);
  for (std::size_t r = 0; r < kRegionCount; ++r) peaks_[r] = std::max(peaks_[r], regional[r]);

  contacts_ = contact_state(sample, config_, contacts_);
  const double since_hs = last_heel_strike_s_ ? t - *last_heel_strike_s_ : 0.0;
  const GaitPhase next = classify_phase(contacts_, phase_, since_hs, config_);
  if (next == phase_) return;

  if (!is_legal_transition(phase_, next)) ++violations_;
  if (first_heel_strike_s_ && phase_start_s_ >= *first_heel_strike_s_) {
    const auto i = static_cast<std::size_t>(phase_);
    phase_total_s_[i] += t - phase_start_s_;
    ++phase_count_[i];
  }

  auto cycle_index = [this] { return heel_strikes_ > 0 ? heel_strikes_ - 1 : 0u; };

  if (phase_ == GaitPhase::Swing && next == GaitPhase::InitialContact) {
    if (last_heel_strike_s_ && pending_toe_off_s_) {
      const double stride = t - *last_heel_strike_s_;
      const double sf = (*pending_toe_off_s_ - *last_heel_strike_s_) / stride;
      ++cycles_;
      const double delta = sf - sf_mean_;
      sf_mean_ += delta / cycles_;
      sf_m2_ += delta * (sf - sf_mean_);
    }
    if (!first_heel_strike_s_) first_heel_strike_s_ = t;
    last_heel_strike_s_ = t;
    pending_toe_off_s_.reset();
    ++heel_strikes_;
    events.push_back({GaitEventKind::HeelStrike, next, t, cycle_index()});
  } else if (phase_ == GaitPhase::PreSwing && next == GaitPhase::Swing) {
    ++toe_offs_;
    if (last_heel_strike_s_ && !pending_toe_off_s_) pending_toe_off_s_ = t;
    events.push_back({GaitEventKind::ToeOff, next, t, cycle_index()});
  } else {
    events.push_back({GaitEventKind::PhaseTransition, next, t, cycle_index()});
  }
  phase_ = next;
  phase_start_s_ = t;
}

GaitReport GaitAnalyzer::report() const {
  GaitReport r;
  r.cycles = cycles_;
  r.heel_strikes = heel_strikes_;
  r.toe_offs = toe_offs_;
  if (heel_strikes_ >= 2) {
    const double minutes = (*last_heel_strike_s_ - *first_heel_strike_s_) / 60.0;
    r.cadence_spm = 2.0 * static_cast<double>(heel_strikes_ - 1) / minutes;
  }
  if (cycles_ > 0) {
    r.stance_fraction_mean = sf_mean_;
    r.stance_fraction_stddev = std::sqrt(sf_m2_ / cycles_);
  }
  r.peak_pressure_pa = peaks_;
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    r.phase_mean_duration_s[i] = phase_count_[i] ? phase_total_s_[i] / phase_count_[i] : 0.0;
  }
  r.phase_sequence_violations = violations_;
  return r;
}

AnalysisResult analyze(std::span<const PressureSample> samples, const AnalysisConfig& config) {
  GaitAnalyzer analyzer(config);
  AnalysisResult result;
  for (const auto& s : samples) analyzer.push(s, result.events);
  result.report = analyzer.report();
  return result;
}

std::string report_to_json(const GaitReport& r, int indent) {
  nlohmann::ordered_json j;
  j["cycles"] = r.cycles;
  j["heel_strikes"] = r.heel_strikes;
  j["toe_offs"] = r.toe_offs;
  j["cadence_spm"] = r.cadence_spm;
  j["stance_fraction_mean"] = r.stance_fraction_mean;
  j["stance_fraction_stddev"] = r.stance_fraction_stddev;
  nlohmann::ordered_json peaks;
  for (auto reg : {SoleRegion::Forefoot, SoleRegion::Midfoot, SoleRegion::Heel}) {
    peaks[std::string(region_name(reg))] = r.peak_pressure_pa[index_of(reg)];
  }
  j["peak_pressure_pa"] = std::move(peaks);
  nlohmann::ordered_json phases;
  for (auto p : kAllPhases) {
    phases[std::string(phase_name(p))] = r.phase_mean_duration_s[static_cast<std::size_t>(p)];
  }
  j["phase_mean_duration_s"] = std::move(phases);
  j["phase_sequence_violations"] = r.phase_sequence_violations;
  return j.dump(indent);
}

GaitReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    GaitReport r;
    r.cycles = j.at("cycles").get<std::uint32_t>();
    r.heel_strikes = j.at("heel_strikes").get<std::uint32_t>();
    r.toe_offs = j.at("toe_offs").get<std::uint32_t>();
    r.cadence_spm = j.at("cadence_spm").get<double>();
    r.stance_fraction_mean = j.at("stance_fraction_mean").get<double>();
    r.stance_fraction_stddev = j.at("stance_fraction_stddev").get<double>();
    for (auto reg : {SoleRegion::Forefoot, SoleRegion::Midfoot, SoleRegion::Heel}) {
      r.peak_pressure_pa[index_of(reg)] =
          j.at("peak_pressure_pa").at(std::string(region_name(reg))).get<double>();
    }
    for (auto p : kAllPhases) {
      r.phase_mean_duration_s[static_cast<std::size_t>(p)] =
          j.at("phase_mean_duration_s").at(std::string(phase_name(p))).get<double>();
    }
    r.phase_sequence_violations = j.at("phase_sequence_violations").get<std::uint32_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("report json: ") + e.what());
  }
}

std::vector<ComparisonRow> compare_sensors(std::span<const StimulusRow> stimulus,
                                           const CalibrationProfile& sensor_profile,
                                           const CalibrationProfile& fsr_profile) {
  std::vector<ComparisonRow> out;
  if (stimulus.empty()) return out;
  const auto sensor_dyn = DynamicsConfig::for_profile(sensor_profile);
  const auto fsr_dyn = DynamicsConfig::for_profile(fsr_profile);
  SensorState sensor = SensorState::at(stimulus.front().time_s);
  SensorState fsr = sensor;
  out.reserve(stimulus.size());
  for (const auto& row : stimulus) {
    const auto a = step(sensor, row.sensor, row.time_s, sensor_profile, sensor_dyn);
    const auto b = step(fsr, row.fsr, row.time_s, fsr_profile, fsr_dyn);
    sensor = a.state;
    fsr = b.state;
    out.push_back({row.time_s, a.resistance, b.resistance});
  }
  return out;
}

std::vector<StimulusRow> builtin_comparison_stimulus() {
  constexpr double kIdle = 300'000.0;
  constexpr double kSensorPressed = 469'052.1;
  constexpr double kFsrHard = 700'000.0;
  constexpr double kFsrLight = 475'000.0;
  std::vector<StimulusRow> rows;
  for (int t = 0; t < 14; ++t) {
    const double sensor = (t >= 5 && t <= 9) ? kSensorPressed : kIdle;
    double fsr = kIdle;
    if (t >= 4 && t <= 6) fsr = kFsrHard;
    if (t >= 11) fsr = kFsrLight;
    rows.push_back({static_cast<double>(t), Pressure(sensor), Pressure(fsr)});
  }
  return rows;
}

std::vector<StimulusRow> read_stimulus_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<StimulusRow> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (columns == 0) {
      if (line == "time_s,sensor_pa,fsr_pa") {
        columns = 3;
      } else if (line == "time_s,pressure_pa") {
        columns = 2;
      } else {
        throw ParseError(line_no, "expected header 'time_s,sensor_pa,fsr_pa' or 'time_s,pressure_pa'");
      }
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != columns) throw ParseError(line_no, "expected " + std::to_string(columns) + " columns");
    try {
      const double t = parse_double(cells[0]);
      const Pressure a(parse_double(cells[1]));
      const Pressure b = columns == 3 ? Pressure(parse_double(cells[2])) : a;
      if (!rows.empty() && !(t > rows.back().time_s)) {
        throw Error(ErrorKind::Parse, "time must strictly increase");
      }
      rows.push_back({t, a, b});
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (columns == 0) throw ParseError(line_no, "missing stimulus header");
  return rows;
}

void write_stimulus_csv(std::span<const StimulusRow> rows, const std::string& path) {
  std::ostringstream os;
  os << "time_s,sensor_pa,fsr_pa\n";
  for (const auto& r : rows) {
    os << format_double(r.time_s) << ',' << format_double(r.sensor.pascals()) << ','
       << format_double(r.fsr.pascals()) << '\n';
  }
  write_text_file(path, os.str());
}

std::string comparison_to_csv(std::span<const ComparisonRow> rows) {
  auto kohm = [](const Resistance& r) {
    return r.is_open() ? std::string("open") : format_double(r.ohms() / 1000.0);
  };
  std::ostringstream os;
  os << "time_s,sensor_kohm,fsr_kohm\n";
  for (const auto& r : rows) {
    os << format_double(r.time_s) << ',' << kohm(r.sensor) << ',' << kohm(r.fsr) << '\n';
  }
  return os.str();
}

}  // namespace solesense
