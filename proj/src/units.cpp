#include "solesense/units.hpp"

#include <string>

namespace solesense {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Range: return "range";
    case ErrorKind::Ordering: return "ordering";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Fit: return "fit";
    case ErrorKind::Config: return "config";
    case ErrorKind::Codec: return "codec";
    case ErrorKind::Io: return "io";
    case ErrorKind::Network: return "network";
  }
  return "unknown";
}

namespace {

double require_non_negative(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw Error(ErrorKind::Domain, std::string(what) + " must be finite and >= 0, got " +
                                       std::to_string(v));
  }
  return v;
}

}  // namespace

Pressure::Pressure(double pascals) : pa_(require_non_negative(pascals, "pressure")) {}

Force::Force(double newtons) : n_(require_non_negative(newtons, "force")) {}

Voltage::Voltage(double volts) : v_(require_non_negative(volts, "voltage")) {}

Resistance Resistance::ohms(double value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw Error(ErrorKind::Domain,
                "resistance must be finite and > 0, got " + std::to_string(value));
  }
  Resistance r;
  r.open_ = false;
  r.ohms_ = value;
  return r;
}

double Resistance::ohms() const {
  if (open_) throw Error(ErrorKind::Domain, "open circuit has no finite resistance");
  return ohms_;
}

std::string_view channel_name(SoleChannel c) noexcept {
  switch (c) {
    case SoleChannel::Forefoot: return "forefoot";
    case SoleChannel::MidfootMedial: return "midfoot_medial";
    case SoleChannel::MidfootCentral: return "midfoot_central";
    case SoleChannel::MidfootLateral: return "midfoot_lateral";
    case SoleChannel::Heel: return "heel";
  }
  return "?";
}

std::string_view region_name(SoleRegion r) noexcept {
  switch (r) {
    case SoleRegion::Forefoot: return "forefoot";
    case SoleRegion::Midfoot: return "midfoot";
    case SoleRegion::Heel: return "heel";
  }
  return "?";
}

Force force_from_mass(double mass_kg) {
  if (!std::isfinite(mass_kg) || mass_kg < 0.0) {
    throw Error(ErrorKind::Domain, "mass must be finite and >= 0, got " + std::to_string(mass_kg));
  }
  return Force(mass_kg * kGravity);
}

Pressure pressure_from_force(Force force, const SensorGeometry& geometry) {
  const double area = geometry.area_m2();
  if (!(area > 0.0) || !std::isfinite(area)) {
    throw Error(ErrorKind::Domain, "sensor area must be > 0");
  }
  return Pressure(force.newtons() / area);
}

std::vector<MassRow> mass_table(std::span<const double> masses_kg, const SensorGeometry& geometry) {
  std::vector<MassRow> rows;
  rows.reserve(masses_kg.size());
  for (std::size_t i = 0; i < masses_kg.size(); ++i) {
    try {
      const Force f = force_from_mass(masses_kg[i]);
      rows.push_back({masses_kg[i], f, pressure_from_force(f, geometry)});
    } catch (const Error& e) {
      throw IndexedError(e.kind(), i, e.what());
    }
  }
  return rows;
}

}  // namespace solesense
