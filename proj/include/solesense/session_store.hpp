#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "solesense/acquisition.hpp"
#include "solesense/gait_analysis.hpp"
#include "solesense/gait_synth.hpp"

namespace solesense {

inline constexpr const char* kDefaultEpoch = "1970-01-01T00:00:00Z";

struct SessionHeader {
  std::uint8_t device_id = 1;
  std::string epoch = kDefaultEpoch;  // RFC 3339, UTC wall clock of t = 0
  DividerConfig divider{};
  std::string profile = "specsheet";
  double sample_rate_hz = 100.0;

  bool operator==(const SessionHeader& o) const;
  void validate() const;
};

bool is_rfc3339(std::string_view s);

struct SessionLog {
  SessionHeader header;
  std::vector<PressureSample> samples;
  std::vector<GaitEvent> events;
  std::optional<GaitReport> report;
};

inline constexpr const char* kSessionCsvColumns =
    "t_s,forefoot_pa,midfoot_medial_pa,midfoot_central_pa,midfoot_lateral_pa,heel_pa";

// CSV holds the header block and samples; events and the report live in JSONL.
void write_csv(const SessionLog& log, const std::string& path);
SessionLog read_csv(const std::string& path);

void write_jsonl(const SessionLog& log, const std::string& path);
SessionLog read_jsonl(const std::string& path);

// Chooses the format from the extension (.jsonl -> JSONL, anything else -> CSV).
void write_session(const SessionLog& log, const std::string& path);
SessionLog read_session(const std::string& path);

// Append-only CSV writer; every record is written as one complete, flushed line.
class SessionCsvWriter {
 public:
  SessionCsvWriter(const std::string& path, const SessionHeader& header);
  void append(const PressureSample& sample);
  void flush();
  const std::string& path() const noexcept { return path_; }
  std::size_t count() const noexcept { return count_; }

 private:
  void write_line(const std::string& line);

  std::string path_;
  std::ofstream out_;
  std::size_t count_ = 0;
};

// Single-channel time series: `time_s,pressure_pa,resistance_ohm`.
struct LegacyRecord {
  double time_s;
  double pressure_pa;
  double resistance_ohm;
};

std::vector<LegacyRecord> read_legacy_csv(const std::string& path);

enum class InputKind { SessionCsv, SessionJsonl, LegacyTimeSeries, Calibration, Unknown };

// Sniffs the first non-comment line of a file.
InputKind detect_input_kind(const std::string& path);

std::string format_session_csv_line(const PressureSample& s);

}  // namespace solesense
