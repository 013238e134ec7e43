#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "solesense/units.hpp"

namespace solesense {

enum class GaitPhase : std::uint8_t {
  InitialContact = 0,
  LoadingResponse,
  MidStance,
  TerminalStance,
  PreSwing,
  Swing,
};

inline constexpr std::size_t kPhaseCount = 6;
inline constexpr std::array<GaitPhase, kPhaseCount> kAllPhases = {
    GaitPhase::InitialContact, GaitPhase::LoadingResponse, GaitPhase::MidStance,
    GaitPhase::TerminalStance, GaitPhase::PreSwing,        GaitPhase::Swing};

std::string_view phase_name(GaitPhase p) noexcept;
std::optional<GaitPhase> phase_from_name(std::string_view name) noexcept;
// Next phase in the cyclic order (Swing wraps to InitialContact).
GaitPhase next_phase(GaitPhase p) noexcept;

struct PressureSample {
  double timestamp_s = 0.0;
  ChannelArray<Pressure> channels{};

  Pressure operator[](SoleChannel c) const noexcept { return channels[index_of(c)]; }
  bool operator==(const PressureSample&) const = default;
};

struct PhaseSpan {
  GaitPhase phase;
  double start;  // cycle fraction, inclusive
  double end;    // cycle fraction, exclusive
};

struct PhaseTimeline {
  std::array<PhaseSpan, kPhaseCount> spans;

  const PhaseSpan& span(GaitPhase p) const noexcept { return spans[static_cast<std::size_t>(p)]; }
  GaitPhase phase_at(double cycle_fraction) const noexcept;
};

// Stance sub-phase boundaries at 2/12/31/50% of a 60%-stance cycle, stretched to the
// requested stance fraction; Swing covers [stance_fraction, 1).
PhaseTimeline default_timeline(double stance_fraction);

struct GaitParams {
  double body_mass_kg = 70.0;
  double cadence_spm = 120.0;  // steps per minute, two steps per stride
  double stance_fraction = 0.6;
  double sample_rate_hz = 100.0;
  std::uint32_t cycles = 10;
  double noise_sigma_pa = 0.0;
  std::uint64_t seed = 0;
  double load_scale = 0.18;    // share of body weight borne by one sensor face
  SensorGeometry geometry{};

  void validate() const;
  double cycle_duration_s() const noexcept { return 120.0 / cadence_spm; }
  std::size_t sample_count() const;
};

// Regional load shares at the vertical force peaks.
inline constexpr double kHeelShare = 1.0;
inline constexpr double kForefootShare = 1.1;
inline constexpr double kMidfootShare = 0.35;  // split evenly over the three midfoot sensors

// Pull-based generator of synthetic plantar pressure; deterministic for a given seed.
class GaitSynthesizer {
 public:
  explicit GaitSynthesizer(const GaitParams& params);

  std::optional<PressureSample> next();
  std::size_t remaining() const noexcept { return total_ - index_; }

  // Noise-free pressure at an absolute time.
  ChannelArray<double> envelope(double t) const;
  // Pressure at the 1.0 load share.
  double reference_pressure_pa() const noexcept { return base_pa_; }

 private:
  GaitParams params_;
  PhaseTimeline timeline_;
  double base_pa_;
  std::size_t total_;
  std::size_t index_ = 0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_;
};

std::vector<PressureSample> synthesize(const GaitParams& params);

struct PhaseRecord {
  std::uint32_t cycle;
  GaitPhase phase;
  double start_s;
  double end_s;
};

std::vector<PhaseRecord> ground_truth(const GaitParams& params);

}  // namespace solesense
