#include "solesense/solesense.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <ctime>
#include <memory>
#include <new>

#include <json.hpp>

#include "solesense/pipeline.hpp"
#include "text_util.hpp"

using namespace solesense;

struct ss_profile {
  CalibrationProfile profile;
};

struct ss_analyzer {
  GaitAnalyzer analyzer;
  std::vector<GaitEvent> scratch;
};

struct ss_collector {
  CalibrationProfile profile;
  std::unique_ptr<RecordingSink> sink;
  std::unique_ptr<Collector> collector;
  bool stopped = false;
};

namespace {

thread_local std::string g_last_error;

ss_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::Domain: return SS_ERR_DOMAIN;
    case ErrorKind::Range: return SS_ERR_RANGE;
    case ErrorKind::Ordering: return SS_ERR_ORDERING;
    case ErrorKind::Parse: return SS_ERR_PARSE;
    case ErrorKind::Fit: return SS_ERR_FIT;
    case ErrorKind::Config: return SS_ERR_CONFIG;
    case ErrorKind::Codec: return SS_ERR_CODEC;
    case ErrorKind::Io: return SS_ERR_IO;
    case ErrorKind::Network: return SS_ERR_NETWORK;
  }
  return SS_ERR_INTERNAL;
}

template <typename F>
ss_status guard(F&& f) noexcept {
  g_last_error.clear();
  try {
    f();
    return SS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return SS_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorKind::Config, std::string(what) + " must not be NULL");
}

DividerConfig to_divider(const ss_divider* d) {
  DividerConfig c;
  if (d != nullptr) {
    c.v_in = d->v_in;
    c.r1_ohm = d->r1_ohm;
    c.adc_bits = d->adc_bits;
    c.v_ref = d->v_ref;
    c.battery_v = d->battery_v;
  }
  c.validate();
  return c;
}

GaitParams to_gait(const ss_gait_params* p) {
  GaitParams g;
  if (p != nullptr) {
    g.body_mass_kg = p->mass_kg;
    g.cadence_spm = p->cadence_spm;
    g.stance_fraction = p->stance_fraction;
    g.sample_rate_hz = p->sample_rate_hz;
    g.cycles = p->cycles;
    g.noise_sigma_pa = p->noise_sigma_pa;
    g.seed = p->seed;
    g.load_scale = p->load_scale;
  }
  g.validate();
  return g;
}

Endpoint stream_endpoint(const ss_stream_options* o) {
  if (o != nullptr && o->addr != nullptr) return Endpoint::parse(o->addr);
  return Endpoint::from_env();
}

EmitterConfig emitter_config(const ss_stream_options* o, std::uint8_t device, double rate) {
  EmitterConfig c;
  c.device_id = device;
  c.rate_hz = rate;
  if (o != nullptr) {
    c.pacing = o->realtime ? Pacing::WallClock : Pacing::Replay;
    if (o->max_attempts > 0) c.max_attempts = o->max_attempts;
  }
  return c;
}

std::string utc_now_rfc3339() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

extern "C" {

const char* ss_last_error(void) { return g_last_error.c_str(); }

const char* ss_status_name(ss_status s) {
  switch (s) {
    case SS_OK: return "ok";
    case SS_ERR_USAGE: return "usage";
    case SS_ERR_DOMAIN: return "domain";
    case SS_ERR_RANGE: return "range";
    case SS_ERR_ORDERING: return "ordering";
    case SS_ERR_PARSE: return "parse";
    case SS_ERR_FIT: return "fit";
    case SS_ERR_CONFIG: return "config";
    case SS_ERR_CODEC: return "codec";
    case SS_ERR_IO: return "io";
    case SS_ERR_NETWORK: return "network";
    case SS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

int ss_status_exit_code(ss_status s) {
  switch (s) {
    case SS_OK: return 0;
    case SS_ERR_USAGE: return 1;
    case SS_ERR_IO: return 3;
    case SS_ERR_NETWORK: return 4;
    default: return 2;
  }
}

void ss_string_free(char* s) { std::free(s); }

const char* ss_version(void) { return "0.1.0"; }

void ss_divider_default(ss_divider* out) {
  if (out == nullptr) return;
  const DividerConfig d;
  *out = {d.v_in, d.r1_ohm, d.adc_bits, d.v_ref, d.battery_v};
}

void ss_gait_params_default(ss_gait_params* out) {
  if (out == nullptr) return;
  const GaitParams g;
  *out = {g.body_mass_kg, g.cadence_spm, g.stance_fraction, g.sample_rate_hz,
          g.cycles,       g.noise_sigma_pa, g.seed,        g.load_scale};
}

ss_status ss_profile_load(const char* name_or_path, ss_profile** out) {
  return guard([&] {
    require(name_or_path, "profile");
    require(out, "out");
    *out = new ss_profile{load_profile(name_or_path)};
  });
}

ss_status ss_profile_fit_csv(const char* csv_path, const char* name, double onset_pa,
                             ss_profile** out) {
  return guard([&] {
    require(csv_path, "csv_path");
    require(out, "out");
    std::string n = name != nullptr ? name : std::filesystem::path(csv_path).stem().string();
    std::optional<double> onset;
    if (onset_pa > 0.0) onset = onset_pa;
    auto outcome = calibrate_file(csv_path, n, onset);
    *out = new ss_profile{std::move(outcome.profile)};
  });
}

void ss_profile_free(ss_profile* profile) { delete profile; }

ss_status ss_profile_static_resistance(const ss_profile* profile, double pressure_pa, double* ohms) {
  return guard([&] {
    require(profile, "profile");
    require(ohms, "ohms");
    *ohms = profile->profile.static_resistance(Pressure(pressure_pa)).ohms_or_inf();
  });
}

ss_status ss_profile_pressure_for(const ss_profile* profile, double ohms, double* pressure_pa) {
  return guard([&] {
    require(profile, "profile");
    require(pressure_pa, "pressure_pa");
    *pressure_pa = profile->profile.pressure_for(ohms).pascals();
  });
}

ss_status ss_profile_to_json(const ss_profile* profile, char** json) {
  return guard([&] {
    require(profile, "profile");
    require(json, "json");
    *json = dup_string(profile_to_json(profile->profile));
  });
}

ss_status ss_profile_save(const ss_profile* profile, const char* path) {
  return guard([&] {
    require(profile, "profile");
    require(path, "path");
    write_text_file(path, profile_to_json(profile->profile));
  });
}

ss_status ss_profile_characterize(const ss_profile* profile, char** json) {
  return guard([&] {
    require(profile, "profile");
    require(json, "json");
    const auto& p = profile->profile;
    *json = dup_string(characterization_to_json(characterize(p, DynamicsConfig::for_profile(p))));
  });
}

ss_status ss_profile_range_report(const ss_profile* profile, char** text) {
  return guard([&] {
    require(profile, "profile");
    require(text, "text");
    *text = dup_string(range_report(profile->profile));
  });
}

ss_status ss_profile_builtin_names(char** names) {
  return guard([&] {
    require(names, "names");
    std::string s;
    for (const auto& n : builtin_profile_names()) s += n + "\n";
    *names = dup_string(s);
  });
}

ss_status ss_simulate(const ss_gait_params* params, const char* profile, const ss_divider* divider,
                      uint8_t device_id, const char* epoch, const char* out_path) {
  return guard([&] {
    require(out_path, "out_path");
    SimulateOptions o;
    o.gait = to_gait(params);
    if (profile != nullptr) o.profile = profile;
    o.divider = to_divider(divider);
    o.device_id = device_id;
    if (epoch != nullptr) o.epoch = epoch;
    write_session(simulate_session(o), out_path);
  });
}

ss_status ss_session_count(const char* path, size_t* samples) {
  return guard([&] {
    require(path, "path");
    require(samples, "samples");
    *samples = read_session(path).samples.size();
  });
}

ss_status ss_analyzer_new(ss_analyzer** out) {
  return guard([&] {
    require(out, "out");
    *out = new ss_analyzer{GaitAnalyzer{}, {}};
  });
}

void ss_analyzer_free(ss_analyzer* analyzer) { delete analyzer; }

ss_status ss_analyzer_push(ss_analyzer* analyzer, double t_s, const double pressures_pa[SS_CHANNELS],
                           size_t* events) {
  return guard([&] {
    require(analyzer, "analyzer");
    require(pressures_pa, "pressures_pa");
    PressureSample s;
    s.timestamp_s = t_s;
    for (std::size_t i = 0; i < kChannelCount; ++i) s.channels[i] = Pressure(pressures_pa[i]);
    analyzer->scratch.clear();
    analyzer->analyzer.push(s, analyzer->scratch);
    if (events != nullptr) *events = analyzer->scratch.size();
  });
}

ss_status ss_analyzer_report_json(const ss_analyzer* analyzer, char** json) {
  return guard([&] {
    require(analyzer, "analyzer");
    require(json, "json");
    *json = dup_string(report_to_json(analyzer->analyzer.report()));
  });
}

ss_status ss_analyze_file(const char* path, const char* plot_dir, char** report_json) {
  return guard([&] {
    require(path, "path");
    require(report_json, "report_json");
    const auto a = analyze_file(path);
    if (plot_dir != nullptr) write_plots(a.plots, plot_dir);
    *report_json = dup_string(a.report_json);
  });
}

ss_status ss_compare(const char* stimulus_path, const char* sensor_profile, const char* fsr_profile,
                     const char* csv_path, const char* svg_path, char** csv_text) {
  return guard([&] {
    const auto stimulus =
        stimulus_path != nullptr ? read_stimulus_csv(stimulus_path) : builtin_comparison_stimulus();
    const auto sensor = load_profile(sensor_profile != nullptr ? sensor_profile : "table43");
    const auto fsr = load_profile(fsr_profile != nullptr ? fsr_profile : "fsr");
    const auto rows = compare_sensors(stimulus, sensor, fsr);
    const std::string csv = comparison_to_csv(rows);
    if (csv_path != nullptr) write_text_file(csv_path, csv);
    if (svg_path != nullptr) write_text_file(svg_path, render_svg(comparison_plot(rows)));
    if (csv_text != nullptr) *csv_text = dup_string(csv);
  });
}

void ss_stream_options_default(ss_stream_options* out) {
  if (out == nullptr) return;
  *out = {nullptr, -1, 0, EmitterConfig{}.max_attempts};
}

ss_status ss_stream_file(const char* session_path, const ss_stream_options* options,
                         uint64_t* frames_sent) {
  return guard([&] {
    require(session_path, "session_path");
    const SessionLog log = read_session(session_path);
    const auto profile = load_profile(log.header.profile);
    const std::uint8_t device = options != nullptr && options->device_id >= 0
                                    ? static_cast<std::uint8_t>(options->device_id)
                                    : log.header.device_id;
    const auto stats = stream_samples(log.samples, stream_endpoint(options), profile,
                                      emitter_config(options, device, log.header.sample_rate_hz),
                                      log.header.divider);
    if (frames_sent != nullptr) *frames_sent = stats.frames_sent;
  });
}

ss_status ss_stream_simulated(const ss_gait_params* params, const char* profile,
                              const ss_stream_options* options, uint64_t* frames_sent) {
  return guard([&] {
    SimulateOptions o;
    o.gait = to_gait(params);
    if (profile != nullptr) o.profile = profile;
    const std::uint8_t device =
        options != nullptr && options->device_id >= 0 ? static_cast<std::uint8_t>(options->device_id) : 1;
    SimulatedDevice sim(o);
    const auto prof = load_profile(o.profile);
    TcpClientTransport transport(stream_endpoint(options));
    Emitter emitter(emitter_config(options, device, o.gait.sample_rate_hz), transport, prof, o.divider);
    const auto stats = emitter.run([&] { return sim.next(); });
    if (frames_sent != nullptr) *frames_sent = stats.frames_sent;
  });
}

void ss_collector_options_default(ss_collector_options* out) {
  if (out == nullptr) return;
  *out = ss_collector_options{};
  out->port = -1;
  out->output_pattern = "session.csv";
  out->sample_rate_hz = 100.0;
  ss_divider_default(&out->divider);
}

ss_status ss_collector_new(const ss_collector_options* options, ss_collector** out) {
  return guard([&] {
    require(options, "options");
    require(out, "out");
    require(options->output_pattern, "output_pattern");
    CollectorConfig cc;
    cc.listen = options->addr != nullptr ? Endpoint::parse(options->addr) : Endpoint::from_env();
    if (options->port >= 0) {
      if (options->port > 65535) throw Error(ErrorKind::Config, "port out of range");
      cc.listen.port = static_cast<std::uint16_t>(options->port);
    }
    cc.divider = to_divider(&options->divider);

    RecordingOptions ro;
    ro.output_pattern = options->output_pattern;
    ro.header.divider = cc.divider;
    ro.header.profile = options->profile != nullptr ? options->profile : "specsheet";
    ro.header.epoch = options->epoch != nullptr ? options->epoch : utc_now_rfc3339();
    ro.header.sample_rate_hz = options->sample_rate_hz;
    ro.analyze = options->analyze != 0;

    auto c = std::make_unique<ss_collector>(ss_collector{load_profile(ro.header.profile), nullptr, nullptr});
    c->sink = std::make_unique<RecordingSink>(std::move(ro));
    c->collector = std::make_unique<Collector>(cc, c->profile, *c->sink);
    *out = c.release();
  });
}

ss_status ss_collector_start(ss_collector* collector) {
  return guard([&] {
    require(collector, "collector");
    collector->collector->start();
  });
}

uint16_t ss_collector_port(const ss_collector* collector) {
  return collector != nullptr ? collector->collector->port() : 0;
}

int ss_collector_wait(ss_collector* collector, size_t connections, int timeout_ms) {
  if (collector == nullptr) return 0;
  return collector->collector->wait_for_closed(connections, std::chrono::milliseconds(timeout_ms)) ? 1 : 0;
}

ss_status ss_collector_stop(ss_collector* collector, char** summary) {
  return guard([&] {
    require(collector, "collector");
    if (collector->stopped) throw Error(ErrorKind::Config, "collector already stopped");
    collector->collector->stop();
    collector->stopped = true;
    const auto devices = collector->sink->finish();
    if (summary == nullptr) return;
    const auto stats = collector->collector->stats();
    nlohmann::ordered_json j;
    j["connections"] = stats.connections_accepted;
    j["resync_events"] = stats.resync_events;
    j["skipped_bytes"] = stats.skipped_bytes;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& d : devices) {
      nlohmann::ordered_json dj;
      dj["device_id"] = d.device_id;
      dj["session"] = d.session_path;
      dj["samples"] = d.samples;
      dj["dropped"] = d.dropped;
      const auto it = stats.devices.find(d.device_id);
      dj["frames"] = it != stats.devices.end() ? it->second.frames : 0;
      dj["gaps"] = it != stats.devices.end() ? it->second.gaps : 0;
      if (d.report_path) dj["report"] = *d.report_path;
      arr.push_back(std::move(dj));
    }
    j["devices"] = std::move(arr);
    *summary = dup_string(j.dump(2));
  });
}

ss_status ss_collector_live_view(const ss_collector* collector, int ansi_color, char** text) {
  return guard([&] {
    require(collector, "collector");
    require(text, "text");
    *text = dup_string(render_live(collector->sink->latest(),
                                   collector->profile.max_pressure().pascals(), ansi_color != 0));
  });
}

void ss_collector_free(ss_collector* collector) {
  if (collector == nullptr) return;
  if (!collector->stopped) {
    collector->collector->stop();
    try {
      collector->sink->finish();
    } catch (...) {
    }
  }
  delete collector;
}

}  // extern "C"
