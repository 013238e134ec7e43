#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "solesense/solesense.h"

namespace {

volatile std::sig_atomic_t g_interrupted = 0;

void on_signal(int) { g_interrupted = 1; }

// Owns a string returned by the library.
struct LibString {
  char* p = nullptr;
  ~LibString() { ss_string_free(p); }
  std::string str() const { return p != nullptr ? std::string(p) : std::string(); }
};

int fail(ss_status s) {
  std::cerr << "solesense: " << ss_status_name(s) << " error: " << ss_last_error() << "\n";
  return ss_status_exit_code(s);
}

const CLI::Validator kOpenUnit =
    CLI::Validator([](std::string& v) -> std::string {
      try {
        const double d = std::stod(v);
        if (d > 0.0 && d < 1.0) return {};
      } catch (const std::exception&) {
      }
      return "value must lie strictly between 0 and 1";
    }, "(0,1)");

struct GaitFlags {
  ss_gait_params p{};

  void add(CLI::App* cmd) {
    ss_gait_params_default(&p);
    cmd->add_option("--mass", p.mass_kg, "body mass in kg")->check(CLI::Range(0.0, 500.0));
    cmd->add_option("--cadence", p.cadence_spm, "steps per minute")->check(CLI::Range(1.0, 400.0));
    cmd->add_option("--stance", p.stance_fraction, "stance fraction of the gait cycle")->check(kOpenUnit);
    cmd->add_option("--cycles", p.cycles, "gait cycles to generate");
    cmd->add_option("--rate", p.sample_rate_hz, "sample rate in Hz")->check(CLI::Range(20.0, 10000.0));
    cmd->add_option("--seed", p.seed, "noise seed");
    cmd->add_option("--noise", p.noise_sigma_pa, "noise sigma in Pa")->check(CLI::NonNegativeNumber);
    cmd->add_option("--load-scale", p.load_scale, "share of body weight on one sensor face")
        ->check(CLI::PositiveNumber);
  }
};

void write_port_file(const std::string& path, unsigned port) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << port << "\n";
  }
  std::filesystem::rename(tmp, path);
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pressure-sensing shoe sole toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ss_version());

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic walking session");
  GaitFlags sim_gait;
  sim_gait.add(sim);
  std::string sim_profile = "specsheet", sim_out, sim_epoch;
  int sim_device = 1;
  sim->add_option("--profile", sim_profile, "calibration profile name or file");
  sim->add_option("--device", sim_device, "device id")->check(CLI::Range(0, 255));
  sim->add_option("--epoch", sim_epoch, "RFC 3339 wall-clock time of t = 0");
  sim->add_option("-o,--output", sim_out, "session file (.csv or .jsonl)")->required();

  // stream
  auto* stream = app.add_subcommand("stream", "send a session to a collector as telemetry frames");
  std::string stream_file, stream_addr, stream_profile = "specsheet";
  GaitFlags stream_gait;
  bool stream_sim = false, stream_realtime = false;
  int stream_device = -1, stream_attempts = 0;
  stream->add_option("file", stream_file, "session file to replay");
  stream->add_flag("--simulate", stream_sim, "stream a live simulation instead of a file");
  stream_gait.add(stream);
  stream->add_option("--profile", stream_profile, "profile for --simulate");
  stream->add_option("--addr", stream_addr, "collector address host:port (env SOLESENSE_ADDR)");
  stream->add_option("--device", stream_device, "override device id")->check(CLI::Range(0, 255));
  stream->add_flag("--realtime", stream_realtime, "pace frames at the sample rate");
  stream->add_option("--max-attempts", stream_attempts, "connect attempts before giving up")
      ->check(CLI::PositiveNumber);

  // collect
  auto* collect = app.add_subcommand("collect", "receive telemetry and save sessions");
  std::string col_out = "session.csv", col_addr, col_profile = "specsheet", col_epoch, col_port_file;
  int col_port = -1, col_connections = 0;
  double col_timeout = 0.0, col_rate = 100.0;
  bool col_analyze = false, col_live = false;
  collect->add_option("-o,--output", col_out, "session path; may contain {device}");
  collect->add_option("--addr", col_addr, "listen address host:port (env SOLESENSE_ADDR)");
  collect->add_option("--port", col_port, "listen port, 0 for any free port")->check(CLI::Range(0, 65535));
  collect->add_option("--profile", col_profile, "calibration profile of the devices");
  collect->add_option("--epoch", col_epoch, "RFC 3339 session epoch (default: now)");
  collect->add_option("--rate", col_rate, "nominal sample rate recorded in the header")
      ->check(CLI::PositiveNumber);
  collect->add_flag("--analyze", col_analyze, "run gait analysis online and write reports");
  collect->add_flag("--live", col_live, "show live per-channel meters");
  collect->add_option("--connections", col_connections, "exit after this many connections close")
      ->check(CLI::NonNegativeNumber);
  collect->add_option("--timeout", col_timeout, "exit after this many seconds")
      ->check(CLI::NonNegativeNumber);
  collect->add_option("--port-file", col_port_file, "write the bound port to this file");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "gait report and plots for a recorded file");
  std::string an_file, an_plots, an_out;
  analyze->add_option("file", an_file, "session, time-series or calibration file")->required();
  analyze->add_option("--plots", an_plots, "directory for SVG plots and CSV data");
  analyze->add_option("-o,--output", an_out, "write the report JSON here instead of stdout");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "fit a profile to pressure/resistance points");
  std::string cal_file, cal_out, cal_name;
  double cal_onset = 0.0;
  calibrate->add_option("file", cal_file, "CSV with pressure_pa,resistance_ohm")->required();
  calibrate->add_option("-o,--output", cal_out, "profile JSON to write");
  calibrate->add_option("--name", cal_name, "profile name (default: file stem)");
  calibrate->add_option("--onset", cal_onset, "onset pressure in Pa")->check(CLI::PositiveNumber);

  // compare
  auto* compare = app.add_subcommand("compare", "fabricated sensor vs FSR resistance responses");
  std::string cmp_file, cmp_sensor = "table43", cmp_fsr = "fsr", cmp_out, cmp_svg;
  compare->add_option("stimulus", cmp_file, "stimulus CSV (default: built-in)");
  compare->add_option("--sensor", cmp_sensor, "fabricated sensor profile");
  compare->add_option("--fsr", cmp_fsr, "FSR profile");
  compare->add_option("-o,--output", cmp_out, "CSV output (default: stdout)");
  compare->add_option("--svg", cmp_svg, "overlay plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (*sim) {
    const ss_status s = ss_simulate(&sim_gait.p, sim_profile.c_str(), nullptr,
                                    static_cast<uint8_t>(sim_device),
                                    sim_epoch.empty() ? nullptr : sim_epoch.c_str(), sim_out.c_str());
    return s == SS_OK ? 0 : fail(s);
  }

  if (*stream) {
    if (stream_sim == !stream_file.empty()) {
      std::cerr << "stream: give either a session file or --simulate\n";
      return 1;
    }
    ss_stream_options o;
    ss_stream_options_default(&o);
    if (!stream_addr.empty()) o.addr = stream_addr.c_str();
    o.device_id = stream_device;
    o.realtime = stream_realtime ? 1 : 0;
    if (stream_attempts > 0) o.max_attempts = stream_attempts;
    uint64_t sent = 0;
    const ss_status s = stream_sim ? ss_stream_simulated(&stream_gait.p, stream_profile.c_str(), &o, &sent)
                                   : ss_stream_file(stream_file.c_str(), &o, &sent);
    if (s != SS_OK) return fail(s);
    std::cerr << "sent " << sent << " frames\n";
    return 0;
  }

  if (*collect) {
    ss_collector_options o;
    ss_collector_options_default(&o);
    if (!col_addr.empty()) o.addr = col_addr.c_str();
    o.port = col_port;
    o.output_pattern = col_out.c_str();
    o.profile = col_profile.c_str();
    if (!col_epoch.empty()) o.epoch = col_epoch.c_str();
    o.sample_rate_hz = col_rate;
    o.analyze = col_analyze ? 1 : 0;

    ss_collector* c = nullptr;
    ss_status s = ss_collector_new(&o, &c);
    if (s != SS_OK) return fail(s);
    s = ss_collector_start(c);
    if (s != SS_OK) {
      ss_collector_free(c);
      return fail(s);
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const unsigned port = ss_collector_port(c);
    if (!col_port_file.empty()) write_port_file(col_port_file, port);
    std::cerr << "listening on port " << port << "\n";

    const auto start = std::chrono::steady_clock::now();
    while (g_interrupted == 0) {
      if (col_connections > 0) {
        if (ss_collector_wait(c, static_cast<size_t>(col_connections), 100)) break;
      } else {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      }
      if (col_timeout > 0.0 &&
          std::chrono::steady_clock::now() - start >= std::chrono::duration<double>(col_timeout)) {
        break;
      }
      if (col_live) {
        LibString view;
        if (ss_collector_live_view(c, 1, &view.p) == SS_OK) {
          std::cerr << "\x1b[H\x1b[2J" << view.str() << std::flush;
        }
      }
    }
    LibString summary;
    s = ss_collector_stop(c, &summary.p);
    ss_collector_free(c);
    if (s != SS_OK) return fail(s);
    std::cout << summary.str() << "\n";
    return 0;
  }

  if (*analyze) {
    LibString report;
    const ss_status s =
        ss_analyze_file(an_file.c_str(), an_plots.empty() ? nullptr : an_plots.c_str(), &report.p);
    if (s != SS_OK) return fail(s);
    const std::string text = report.str() + "\n";
    if (an_out.empty()) {
      std::cout << text;
    } else if (!write_file(an_out, text)) {
      std::cerr << "solesense: io error: cannot write " << an_out << "\n";
      return 3;
    }
    return 0;
  }

  if (*calibrate) {
    ss_profile* p = nullptr;
    ss_status s = ss_profile_fit_csv(cal_file.c_str(), cal_name.empty() ? nullptr : cal_name.c_str(),
                                     cal_onset, &p);
    if (s != SS_OK) return fail(s);
    LibString range, report;
    s = ss_profile_range_report(p, &range.p);
    if (s == SS_OK) s = ss_profile_characterize(p, &report.p);
    if (s == SS_OK && !cal_out.empty()) s = ss_profile_save(p, cal_out.c_str());
    ss_profile_free(p);
    if (s != SS_OK) return fail(s);
    std::cout << "range: " << range.str() << "\n" << report.str();
    return 0;
  }

  if (*compare) {
    LibString csv;
    const ss_status s = ss_compare(cmp_file.empty() ? nullptr : cmp_file.c_str(), cmp_sensor.c_str(),
                                   cmp_fsr.c_str(), cmp_out.empty() ? nullptr : cmp_out.c_str(),
                                   cmp_svg.empty() ? nullptr : cmp_svg.c_str(), &csv.p);
    if (s != SS_OK) return fail(s);
    if (cmp_out.empty()) std::cout << csv.str();
    return 0;
  }
  return 1;
}
