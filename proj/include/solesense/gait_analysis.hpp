#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "solesense/gait_synth.hpp"
#include "solesense/sensor_model.hpp"

namespace solesense {

enum class RegionReduction { Max, Mean };

struct AnalysisConfig {
  // Contact base pressure per region (forefoot, midfoot, heel).
  std::array<double, kRegionCount> contact_base_pa = {20'000.0, 20'000.0, 20'000.0};
  double on_factor = 1.10;
  double off_factor = 0.90;
  RegionReduction reduction = RegionReduction::Max;
  double loading_dwell_s = 0.030;

  double on_threshold(SoleRegion r) const noexcept { return on_factor * contact_base_pa[index_of(r)]; }
  double off_threshold(SoleRegion r) const noexcept { return off_factor * contact_base_pa[index_of(r)]; }
};

struct ContactState {
  bool heel_on = false;
  bool midfoot_on = false;
  bool forefoot_on = false;

  bool any() const noexcept { return heel_on || midfoot_on || forefoot_on; }
  bool operator==(const ContactState&) const = default;
};

std::array<double, kRegionCount> regional_pressure(const PressureSample& sample,
                                                   RegionReduction reduction);

// Schmitt trigger per region: ON at >= on threshold, OFF at <= off threshold, otherwise
// the previous state is kept.
ContactState contact_state(const PressureSample& sample, const AnalysisConfig& config,
                           const ContactState& previous = {});

// Phase implied by the contacts given where the foot was. `since_heel_strike_s` drives the
// InitialContact -> LoadingResponse dwell.
GaitPhase classify_phase(const ContactState& state, GaitPhase previous, double since_heel_strike_s,
                         const AnalysisConfig& config = {});

// Staying put or advancing one step in the cyclic order.
bool is_legal_transition(GaitPhase from, GaitPhase to) noexcept;

enum class GaitEventKind : std::uint8_t { HeelStrike, ToeOff, PhaseTransition };

struct GaitEvent {
  GaitEventKind kind;
  GaitPhase phase;  // phase entered
  double timestamp_s;
  std::uint32_t cycle_index;

  bool operator==(const GaitEvent&) const = default;
};

std::string_view event_kind_name(GaitEventKind k) noexcept;
std::optional<GaitEventKind> event_kind_from_name(std::string_view name) noexcept;

struct GaitReport {
  std::uint32_t cycles = 0;
  std::uint32_t heel_strikes = 0;
  std::uint32_t toe_offs = 0;
  double cadence_spm = 0.0;
  double stance_fraction_mean = 0.0;
  double stance_fraction_stddev = 0.0;
  std::array<double, kRegionCount> peak_pressure_pa{};
  std::array<double, kPhaseCount> phase_mean_duration_s{};
  std::uint32_t phase_sequence_violations = 0;

  bool operator==(const GaitReport&) const = default;
};

std::string report_to_json(const GaitReport& report, int indent = 2);
GaitReport report_from_json(const std::string& text);

// Single-pass, bounded-memory gait state machine. Feeding samples in pieces is
// equivalent to feeding their concatenation.
class GaitAnalyzer {
 public:
  explicit GaitAnalyzer(AnalysisConfig config = {});

  // Appends any events the sample triggers to `events`. Throws IndexedError(Ordering)
  // unless timestamps strictly increase.
  void push(const PressureSample& sample, std::vector<GaitEvent>& events);
  std::vector<GaitEvent> push(const PressureSample& sample);

  GaitReport report() const;
  GaitPhase phase() const noexcept { return phase_; }
  ContactState contacts() const noexcept { return contacts_; }
  std::size_t samples_seen() const noexcept { return samples_; }

 private:
  AnalysisConfig config_;
  ContactState contacts_{};
  GaitPhase phase_ = GaitPhase::Swing;
  double phase_start_s_ = 0.0;
  std::size_t samples_ = 0;
  double last_t_ = 0.0;

  std::optional<double> last_heel_strike_s_;
  std::optional<double> first_heel_strike_s_;
  std::optional<double> pending_toe_off_s_;
  std::uint32_t heel_strikes_ = 0;
  std::uint32_t toe_offs_ = 0;
  std::uint32_t cycles_ = 0;
  std::uint32_t violations_ = 0;

  // Welford accumulator for stance fraction.
  double sf_mean_ = 0.0;
  double sf_m2_ = 0.0;

  std::array<double, kRegionCount> peaks_{};
  std::array<double, kPhaseCount> phase_total_s_{};
  std::array<std::uint32_t, kPhaseCount> phase_count_{};
};

struct AnalysisResult {
  std::vector<GaitEvent> events;
  GaitReport report;
};

AnalysisResult analyze(std::span<const PressureSample> samples, const AnalysisConfig& config = {});

// Pressure drive for the sensor-vs-FSR comparison; one column per sensor.
struct StimulusRow {
  double time_s;
  Pressure sensor;
  Pressure fsr;
};

struct ComparisonRow {
  double time_s;
  Resistance sensor;
  Resistance fsr;
};

// Steps both sensor models through their stimulus columns, each with dynamics fitted to
// its own profile.
std::vector<ComparisonRow> compare_sensors(std::span<const StimulusRow> stimulus,
                                           const CalibrationProfile& sensor_profile,
                                           const CalibrationProfile& fsr_profile);

// Stimulus that replays the published sensor/FSR comparison.
std::vector<StimulusRow> builtin_comparison_stimulus();

// Accepts `time_s,sensor_pa,fsr_pa` or `time_s,pressure_pa` (same drive for both).
std::vector<StimulusRow> read_stimulus_csv(const std::string& path);
void write_stimulus_csv(std::span<const StimulusRow> rows, const std::string& path);

// `time_s,sensor_kohm,fsr_kohm`; open circuits print as "open".
std::string comparison_to_csv(std::span<const ComparisonRow> rows);

}  // namespace solesense
