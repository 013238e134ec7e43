#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "solesense/acquisition.hpp"
#include "solesense/gait_analysis.hpp"
#include "solesense/gait_synth.hpp"
#include "solesense/plots.hpp"
#include "solesense/sensor_model.hpp"
#include "solesense/session_store.hpp"
#include "solesense/telemetry_net.hpp"

namespace solesense {

struct SimulateOptions {
  GaitParams gait{};
  std::string profile = "specsheet";
  DividerConfig divider{};
  std::uint8_t device_id = 1;
  std::string epoch = kDefaultEpoch;
};

// Synthetic gait -> per-channel sensor dynamics -> divider -> ADC -> pressure, so the
// stored pressures are exactly what a device with this profile would report.
SessionLog simulate_session(const SimulateOptions& options);

// Pull-based form of simulate_session for live streaming.
class SimulatedDevice {
 public:
  explicit SimulatedDevice(const SimulateOptions& options);
  std::optional<PressureSample> next();

 private:
  CalibrationProfile profile_;
  DynamicsConfig dynamics_;
  DividerConfig divider_;
  GaitSynthesizer synth_;
  ChannelArray<SensorState> state_{};
};

// Replays `samples` as device frames through a TCP transport.
EmitterStats stream_samples(std::span<const PressureSample> samples, const Endpoint& endpoint,
                            const CalibrationProfile& profile, const EmitterConfig& config,
                            const DividerConfig& divider);

struct PlotBundle {
  std::optional<Plot> time_pressure;
  std::optional<Plot> time_resistance;
  std::optional<Plot> response_curve;
};

struct FileAnalysis {
  InputKind kind;
  std::string report_json;  // GaitReport for sessions, a record summary otherwise
  PlotBundle plots;
};

FileAnalysis analyze_file(const std::string& path, const AnalysisConfig& config = {});

// Writes each available plot as <dir>/<name>.svg and .csv; returns the paths written.
std::vector<std::string> write_plots(const PlotBundle& plots, const std::string& dir);

// "150000 Ω @ 200 kPa … 200 Ω @ 750 kPa"
std::string range_report(const CalibrationProfile& profile);

struct CalibrationOutcome {
  CalibrationProfile profile;
  Characterization characterization;
};

// Onset defaults to min(200 kPa, lowest calibration pressure).
CalibrationOutcome calibrate_file(const std::string& csv_path, const std::string& name,
                                  std::optional<double> onset_pa = std::nullopt);

Plot comparison_plot(std::span<const ComparisonRow> rows);

// Session path for a device: `{device}` in the pattern is replaced by the id; otherwise the
// first device uses the pattern and later ones `<stem>.dev<ID><ext>`.
std::string device_session_path(const std::string& pattern, std::uint8_t device_id, bool first);

// Replaces the extension with `.report.json`.
std::string report_path_for(const std::string& session_path);

struct RecordingOptions {
  std::string output_pattern;
  SessionHeader header{};  // device_id is filled per device
  bool analyze = false;
  AnalysisConfig analysis{};
};

struct RecordedDevice {
  std::uint8_t device_id;
  std::string session_path;
  std::size_t samples = 0;
  std::size_t dropped = 0;  // non-increasing timestamps (resent frames)
  std::optional<std::string> report_path;
  std::optional<GaitReport> report;
};

// Collector sink that writes one session file per device and optionally analyzes online.
class RecordingSink final : public SampleSink {
 public:
  explicit RecordingSink(RecordingOptions options);
  void accept(const DeviceSample& sample) override;

  std::map<std::uint8_t, PressureSample> latest() const;
  // Flushes files, writes reports and, if nothing connected, a header-only session file.
  std::vector<RecordedDevice> finish();

 private:
  struct DeviceState {
    std::unique_ptr<SessionCsvWriter> writer;
    std::optional<GaitAnalyzer> analyzer;
    std::optional<double> last_t;
    RecordedDevice info;
  };

  RecordingOptions options_;
  mutable std::mutex mu_;
  std::map<std::uint8_t, DeviceState> devices_;
  std::map<std::uint8_t, PressureSample> latest_;
  bool finished_ = false;
};

}  // namespace solesense
