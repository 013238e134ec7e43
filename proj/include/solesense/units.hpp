#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "solesense/error.hpp"

namespace solesense {

// Standard gravity as used for the sole's mass-to-force conversion.
inline constexpr double kGravity = 9.81;

class Pressure {
 public:
  constexpr Pressure() = default;
  explicit Pressure(double pascals);

  double pascals() const noexcept { return pa_; }
  double kilopascals() const noexcept { return pa_ / 1000.0; }

  auto operator<=>(const Pressure&) const = default;

 private:
  double pa_ = 0.0;
};

class Force {
 public:
  constexpr Force() = default;
  explicit Force(double newtons);

  double newtons() const noexcept { return n_; }

  auto operator<=>(const Force&) const = default;

 private:
  double n_ = 0.0;
};

// A finite positive resistance, or the unloaded sensor's open circuit.
class Resistance {
 public:
  static Resistance ohms(double value);
  static constexpr Resistance open_circuit() noexcept { return Resistance{}; }

  bool is_open() const noexcept { return open_; }
  // Throws Domain for an open circuit.
  double ohms() const;
  // +inf for an open circuit.
  double ohms_or_inf() const noexcept {
    return open_ ? std::numeric_limits<double>::infinity() : ohms_;
  }

  bool operator==(const Resistance& other) const noexcept {
    return open_ == other.open_ && (open_ || ohms_ == other.ohms_);
  }
  std::partial_ordering operator<=>(const Resistance& other) const noexcept {
    return ohms_or_inf() <=> other.ohms_or_inf();
  }

 private:
  constexpr Resistance() = default;
  bool open_ = true;
  double ohms_ = 0.0;
};

class Voltage {
 public:
  constexpr Voltage() = default;
  explicit Voltage(double volts);

  double volts() const noexcept { return v_; }

  auto operator<=>(const Voltage&) const = default;

 private:
  double v_ = 0.0;
};

// Sensor positions in canonical wire/report order.
enum class SoleChannel : std::size_t {
  Forefoot = 0,
  MidfootMedial = 1,
  MidfootCentral = 2,
  MidfootLateral = 3,
  Heel = 4,
};

inline constexpr std::size_t kChannelCount = 5;

inline constexpr std::array<SoleChannel, kChannelCount> kAllChannels = {
    SoleChannel::Forefoot, SoleChannel::MidfootMedial, SoleChannel::MidfootCentral,
    SoleChannel::MidfootLateral, SoleChannel::Heel};

enum class SoleRegion { Forefoot, Midfoot, Heel };

inline constexpr std::size_t kRegionCount = 3;

constexpr std::size_t index_of(SoleChannel c) noexcept { return static_cast<std::size_t>(c); }
constexpr std::size_t index_of(SoleRegion r) noexcept { return static_cast<std::size_t>(r); }

constexpr SoleRegion region_of(SoleChannel c) noexcept {
  switch (c) {
    case SoleChannel::Forefoot: return SoleRegion::Forefoot;
    case SoleChannel::Heel: return SoleRegion::Heel;
    default: return SoleRegion::Midfoot;
  }
}

std::string_view channel_name(SoleChannel c) noexcept;
std::string_view region_name(SoleRegion r) noexcept;

template <typename T>
using ChannelArray = std::array<T, kChannelCount>;

struct SensorGeometry {
  double side_length_m = 0.015;
  double thickness_m = 0.00125;

  double area_m2() const noexcept { return side_length_m * side_length_m; }
};

Force force_from_mass(double mass_kg);
Pressure pressure_from_force(Force force, const SensorGeometry& geometry = {});

struct MassRow {
  double mass_kg;
  Force force;
  Pressure pressure;
};

// Throws IndexedError naming the first offending mass.
std::vector<MassRow> mass_table(std::span<const double> masses_kg,
                                const SensorGeometry& geometry = {});

}  // namespace solesense
