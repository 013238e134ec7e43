#include "solesense/gait_synth.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace solesense {

std::string_view phase_name(GaitPhase p) noexcept {
  switch (p) {
    case GaitPhase::InitialContact: return "InitialContact";
    case GaitPhase::LoadingResponse: return "LoadingResponse";
    case GaitPhase::MidStance: return "MidStance";
    case GaitPhase::TerminalStance: return "TerminalStance";
    case GaitPhase::PreSwing: return "PreSwing";
    case GaitPhase::Swing: return "Swing";
  }
  return "?";
}

std::optional<GaitPhase> phase_from_name(std::string_view name) noexcept {
  for (auto p : kAllPhases) {
    if (phase_name(p) == name) return p;
  }
  return std::nullopt;
}

GaitPhase next_phase(GaitPhase p) noexcept {
  return p == GaitPhase::Swing ? GaitPhase::InitialContact
                               : static_cast<GaitPhase>(static_cast<std::uint8_t>(p) + 1);
}

GaitPhase PhaseTimeline::phase_at(double u) const noexcept {
  for (const auto& s : spans) {
    if (u >= s.start && u < s.end) return s.phase;
  }
  return GaitPhase::Swing;
}

PhaseTimeline default_timeline(double stance_fraction) {
  if (!(stance_fraction > 0.0 && stance_fraction < 1.0)) {
    throw Error(ErrorKind::Domain, "stance fraction must lie in (0, 1)");
  }
  const double k = stance_fraction / 0.6;
  const std::array<double, kPhaseCount + 1> b = {
      0.0, 0.02 * k, 0.12 * k, 0.31 * k, 0.50 * k, stance_fraction, 1.0};
  PhaseTimeline tl{};
  for (std::size_t i = 0; i < kPhaseCount; ++i) tl.spans[i] = {kAllPhases[i], b[i], b[i + 1]};
  return tl;
}

void GaitParams::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Domain, m); };
  if (!(std::isfinite(body_mass_kg) && body_mass_kg >= 0.0)) fail("body mass must be >= 0");
  if (!(std::isfinite(cadence_spm) && cadence_spm > 0.0)) fail("cadence must be > 0");
  if (!(stance_fraction > 0.0 && stance_fraction < 1.0)) fail("stance fraction must lie in (0, 1)");
  if (!(std::isfinite(sample_rate_hz) && sample_rate_hz >= 20.0)) fail("sample rate must be >= 20 Hz");
  if (!(std::isfinite(noise_sigma_pa) && noise_sigma_pa >= 0.0)) fail("noise sigma must be >= 0");
  if (!(std::isfinite(load_scale) && load_scale > 0.0)) fail("load scale must be > 0");
  if (!(geometry.area_m2() > 0.0)) fail("sensor area must be > 0");
}

std::size_t GaitParams::sample_count() const {
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(cycles) * cycle_duration_s() * sample_rate_hz));
}

namespace {

// Raised-cosine lobe: 0 at `start`, 1 at `peak`, 0 at `end`; zero slope at all three.
double lobe(double u, double start, double peak, double end) {
  if (u <= start || u >= end) return 0.0;
  if (u <= peak) return 0.5 * (1.0 - std::cos(std::numbers::pi * (u - start) / (peak - start)));
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (u - peak) / (end - peak)));
}

}  // namespace

GaitSynthesizer::GaitSynthesizer(const GaitParams& params)
    : params_(params),
      timeline_(default_timeline(params.stance_fraction)),
      base_pa_(0.0),
      total_(0),
      rng_(params.seed),
      noise_(0.0, params.noise_sigma_pa > 0.0 ? params.noise_sigma_pa : 1.0) {
  params_.validate();
  base_pa_ = pressure_from_force(force_from_mass(params_.body_mass_kg), params_.geometry).pascals() *
             params_.load_scale;
  total_ = params_.sample_count();
}

ChannelArray<double> GaitSynthesizer::envelope(double t) const {
  const double cycle = params_.cycle_duration_s();
  const double u = t / cycle - std::floor(t / cycle);
  const double k = params_.stance_fraction / 0.6;

  const double heel = kHeelShare * lobe(u, 0.0, 0.03 * k, 0.31 * k);
  const double mid = kMidfootShare / 3.0 * lobe(u, 0.02 * k, 0.25 * k, 0.48 * k);
  const double fore = kForefootShare * lobe(u, 0.31 * k, 0.53 * k, params_.stance_fraction);

  ChannelArray<double> out{};
  out[index_of(SoleChannel::Forefoot)] = base_pa_ * fore;
  out[index_of(SoleChannel::MidfootMedial)] = base_pa_ * mid;
  out[index_of(SoleChannel::MidfootCentral)] = base_pa_ * mid;
  out[index_of(SoleChannel::MidfootLateral)] = base_pa_ * mid;
  out[index_of(SoleChannel::Heel)] = base_pa_ * heel;
  return out;
}

std::optional<PressureSample> GaitSynthesizer::next() {
  if (index_ >= total_) return std::nullopt;
  PressureSample s;
  s.timestamp_s = static_cast<double>(index_) / params_.sample_rate_hz;
  const auto env = envelope(s.timestamp_s);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    double v = env[c];
    if (params_.noise_sigma_pa > 0.0) v = std::max(0.0, v + noise_(rng_));
    s.channels[c] = Pressure(v);
  }
  ++index_;
  return s;
}

std::vector<PressureSample> synthesize(const GaitParams& params) {
  GaitSynthesizer gen(params);
  std::vector<PressureSample> out;
  out.reserve(gen.remaining());
  while (auto s = gen.next()) out.push_back(*s);
  return out;
}

std::vector<PhaseRecord> ground_truth(const GaitParams& params) {
  params.validate();
  const auto tl = default_timeline(params.stance_fraction);
  const double cycle = params.cycle_duration_s();
  std::vector<PhaseRecord> out;
  out.reserve(params.cycles * kPhaseCount);
  for (std::uint32_t c = 0; c < params.cycles; ++c) {
    const double t0 = static_cast<double>(c) * cycle;
    for (const auto& s : tl.spans) {
      out.push_back({c, s.phase, t0 + s.start * cycle, t0 + s.end * cycle});
    }
  }
  return out;
}

}  // namespace solesense
