#include "solesense/pipeline.hpp"

#include <filesystem>

#include <json.hpp>

#include "text_util.hpp"

namespace solesense {

namespace {

DynamicsConfig sim_dynamics(const CalibrationProfile& profile, const GaitParams& gait) {
  auto d = DynamicsConfig::for_profile(profile);
  d.sample_period_s = 1.0 / gait.sample_rate_hz;
  return d;
}

PressureSample through_sensor(const PressureSample& applied, ChannelArray<SensorState>& state,
                              const CalibrationProfile& profile, const DynamicsConfig& dynamics,
                              const DividerConfig& divider) {
  PressureSample out;
  out.timestamp_s = applied.timestamp_s;
  for (auto c : kAllChannels) {
    auto& s = state[index_of(c)];
    const auto r = step(s, applied[c], applied.timestamp_s, profile, dynamics);
    s = r.state;
    const AdcCount count = resistance_to_count(r.resistance, divider);
    out.channels[index_of(c)] = count_to_pressure(count, profile, divider).pressure;
  }
  return out;
}

}  // namespace

SimulatedDevice::SimulatedDevice(const SimulateOptions& options)
    : profile_(load_profile(options.profile)),
      dynamics_(sim_dynamics(profile_, options.gait)),
      divider_(options.divider),
      synth_(options.gait) {
  divider_.validate();
}

std::optional<PressureSample> SimulatedDevice::next() {
  auto applied = synth_.next();
  if (!applied) return std::nullopt;
  return through_sensor(*applied, state_, profile_, dynamics_, divider_);
}

SessionLog simulate_session(const SimulateOptions& options) {
  options.gait.validate();
  SessionLog log;
  log.header.device_id = options.device_id;
  log.header.epoch = options.epoch;
  log.header.divider = options.divider;
  log.header.profile = options.profile;
  log.header.sample_rate_hz = options.gait.sample_rate_hz;
  log.header.validate();

  SimulatedDevice device(options);
  log.samples.reserve(options.gait.sample_count());
  while (auto s = device.next()) log.samples.push_back(*s);
  return log;
}

EmitterStats stream_samples(std::span<const PressureSample> samples, const Endpoint& endpoint,
                            const CalibrationProfile& profile, const EmitterConfig& config,
                            const DividerConfig& divider) {
  TcpClientTransport transport(endpoint);
  Emitter emitter(config, transport, profile, divider);
  return emitter.run(samples);
}

namespace {

Plot session_pressure_plot(const std::vector<PressureSample>& samples) {
  Plot p{"Time vs Pressure", "t_s", "pressure_pa", {}};
  for (auto c : kAllChannels) {
    Series s{std::string(channel_name(c)) + "_pa", {}};
    s.points.reserve(samples.size());
    for (const auto& x : samples) s.points.emplace_back(x.timestamp_s, x[c].pascals());
    p.series.push_back(std::move(s));
  }
  return p;
}

Plot session_resistance_plot(const std::vector<PressureSample>& samples,
                             const CalibrationProfile& profile) {
  Plot p{"Time vs Resistance", "t_s", "resistance_ohm", {}};
  for (auto c : kAllChannels) {
    Series s{std::string(channel_name(c)) + "_ohm", {}};
    s.points.reserve(samples.size());
    for (const auto& x : samples) {
      s.points.emplace_back(x.timestamp_s, profile.static_resistance(x[c]).ohms_or_inf());
    }
    p.series.push_back(std::move(s));
  }
  return p;
}

Plot profile_curve(const CalibrationProfile& profile) {
  Plot p{"Pressure Response Curve", "pressure_pa", "resistance_ohm", {}};
  Series s{"resistance_ohm", {}};
  for (const auto& pt : profile.points()) {
    s.points.emplace_back(pt.pressure.pascals(), pt.resistance.ohms());
  }
  p.series.push_back(std::move(s));
  return p;
}

}  // namespace

FileAnalysis analyze_file(const std::string& path, const AnalysisConfig& config) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::Io, "cannot open " + path);
  FileAnalysis out{detect_input_kind(path), {}, {}};
  switch (out.kind) {
    case InputKind::SessionCsv:
    case InputKind::SessionJsonl: {
      const SessionLog log = read_session(path);
      out.report_json = report_to_json(analyze(log.samples, config).report);
      out.plots.time_pressure = session_pressure_plot(log.samples);
      std::optional<CalibrationProfile> profile;
      try {
        profile = load_profile(log.header.profile);
      } catch (const Error&) {
        // Unknown profile: resistance plots are unavailable.
      }
      if (profile) {
        out.plots.time_resistance = session_resistance_plot(log.samples, *profile);
        out.plots.response_curve = profile_curve(*profile);
      }
      break;
    }
    case InputKind::LegacyTimeSeries: {
      const auto rows = read_legacy_csv(path);
      Plot tp{"Time vs Pressure", "time_s", "pressure_pa", {{"pressure_pa", {}}}};
      Plot tr{"Time vs Resistance", "time_s", "resistance_ohm", {{"resistance_ohm", {}}}};
      Plot rc{"Pressure Response Curve", "pressure_pa", "resistance_ohm", {{"resistance_ohm", {}}}};
      double peak = 0.0;
      double min_r = rows.empty() ? 0.0 : rows.front().resistance_ohm;
      for (const auto& r : rows) {
        tp.series[0].points.emplace_back(r.time_s, r.pressure_pa);
        tr.series[0].points.emplace_back(r.time_s, r.resistance_ohm);
        rc.series[0].points.emplace_back(r.pressure_pa, r.resistance_ohm);
        peak = std::max(peak, r.pressure_pa);
        min_r = std::min(min_r, r.resistance_ohm);
      }
      nlohmann::ordered_json j;
      j["input"] = "legacy_time_series";
      j["records"] = rows.size();
      j["duration_s"] = rows.empty() ? 0.0 : rows.back().time_s - rows.front().time_s;
      j["peak_pressure_pa"] = peak;
      j["min_resistance_ohm"] = min_r;
      out.report_json = j.dump(2);
      out.plots = {std::move(tp), std::move(tr), std::move(rc)};
      break;
    }
    case InputKind::Calibration: {
      const auto pts = read_calibration_csv(path);
      Plot rc{"Pressure Response Curve", "pressure_pa", "resistance_ohm", {{"resistance_ohm", {}}}};
      for (const auto& pt : pts) {
        rc.series[0].points.emplace_back(pt.pressure.pascals(), pt.resistance.ohms());
      }
      nlohmann::ordered_json j;
      j["input"] = "calibration";
      j["records"] = pts.size();
      out.report_json = j.dump(2);
      out.plots.response_curve = std::move(rc);
      break;
    }
    case InputKind::Unknown:
      throw Error(ErrorKind::Parse, "unrecognised input format: " + path);
  }
  return out;
}

std::vector<std::string> write_plots(const PlotBundle& plots, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + dir + ": " + ec.message());
  std::vector<std::string> written;
  auto emit = [&](const std::optional<Plot>& p, const char* name) {
    if (!p) return;
    for (auto& f : write_plot(*p, (std::filesystem::path(dir) / name).string())) written.push_back(f);
  };
  emit(plots.time_pressure, "time_pressure");
  emit(plots.time_resistance, "time_resistance");
  emit(plots.response_curve, "response_curve");
  return written;
}

std::string range_report(const CalibrationProfile& profile) {
  return format_double(profile.max_ohms()) + " Ω @ " +
         format_double(profile.onset().pascals() / 1000.0) + " kPa … " +
         format_double(profile.min_ohms()) + " Ω @ " +
         format_double(profile.max_pressure().pascals() / 1000.0) + " kPa";
}

CalibrationOutcome calibrate_file(const std::string& csv_path, const std::string& name,
                                  std::optional<double> onset_pa) {
  const auto pts = read_calibration_csv(csv_path);
  double onset = kDefaultOnsetPa;
  if (onset_pa) {
    onset = *onset_pa;
  } else {
    for (const auto& p : pts) onset = std::min(onset, p.pressure.pascals());
  }
  auto profile = fit_profile(name, pts, Pressure(onset));
  auto ch = characterize(profile, DynamicsConfig::for_profile(profile));
  return {std::move(profile), std::move(ch)};
}

Plot comparison_plot(std::span<const ComparisonRow> rows) {
  Plot p{"Comparison of Resistance Responses", "time_s", "resistance_kohm",
         {{"sensor_kohm", {}}, {"fsr_kohm", {}}}};
  for (const auto& r : rows) {
    p.series[0].points.emplace_back(r.time_s, r.sensor.ohms_or_inf() / 1000.0);
    p.series[1].points.emplace_back(r.time_s, r.fsr.ohms_or_inf() / 1000.0);
  }
  return p;
}

std::string device_session_path(const std::string& pattern, std::uint8_t device_id, bool first) {
  const std::string id = std::to_string(device_id);
  const auto pos = pattern.find("{device}");
  if (pos != std::string::npos) {
    std::string out = pattern;
    for (auto p = pos; p != std::string::npos; p = out.find("{device}", p + id.size())) {
      out.replace(p, 8, id);
    }
    return out;
  }
  if (first) return pattern;
  std::filesystem::path p(pattern);
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + ".dev" + id + ext;
}

std::string report_path_for(const std::string& session_path) {
  std::filesystem::path p(session_path);
  p.replace_extension(".report.json");
  return p.string();
}

RecordingSink::RecordingSink(RecordingOptions options) : options_(std::move(options)) {
  options_.header.validate();
}

void RecordingSink::accept(const DeviceSample& sample) {
  std::lock_guard lock(mu_);
  if (finished_) return;
  auto it = devices_.find(sample.device_id);
  if (it == devices_.end()) {
    DeviceState st;
    SessionHeader h = options_.header;
    h.device_id = sample.device_id;
    st.info.device_id = sample.device_id;
    st.info.session_path = device_session_path(options_.output_pattern, sample.device_id, devices_.empty());
    st.writer = std::make_unique<SessionCsvWriter>(st.info.session_path, h);
    if (options_.analyze) st.analyzer.emplace(options_.analysis);
    it = devices_.emplace(sample.device_id, std::move(st)).first;
  }
  auto& st = it->second;
  if (st.last_t && !(sample.sample.timestamp_s > *st.last_t)) {
    ++st.info.dropped;
    return;
  }
  st.last_t = sample.sample.timestamp_s;
  st.writer->append(sample.sample);
  if (st.analyzer) st.analyzer->push(sample.sample);
  ++st.info.samples;
  latest_[sample.device_id] = sample.sample;
}

std::map<std::uint8_t, PressureSample> RecordingSink::latest() const {
  std::lock_guard lock(mu_);
  return latest_;
}

std::vector<RecordedDevice> RecordingSink::finish() {
  std::lock_guard lock(mu_);
  finished_ = true;
  std::vector<RecordedDevice> out;
  if (devices_.empty()) {
    RecordedDevice rd{};
    rd.device_id = options_.header.device_id;
    rd.session_path = device_session_path(options_.output_pattern, options_.header.device_id, true);
    SessionLog empty;
    empty.header = options_.header;
    write_csv(empty, rd.session_path);
    if (options_.analyze) {
      rd.report = GaitAnalyzer(options_.analysis).report();
      rd.report_path = report_path_for(rd.session_path);
      write_text_file(*rd.report_path, report_to_json(*rd.report) + "\n");
    }
    out.push_back(std::move(rd));
    return out;
  }
  for (auto& [id, st] : devices_) {
    st.writer->flush();
    if (st.analyzer) {
      st.info.report = st.analyzer->report();
      st.info.report_path = report_path_for(st.info.session_path);
      write_text_file(*st.info.report_path, report_to_json(*st.info.report) + "\n");
    }
    out.push_back(st.info);
  }
  return out;
}

}  // namespace solesense
