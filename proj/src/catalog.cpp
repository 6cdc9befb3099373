/*
 * Copyright 2026 The tdcat Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "tdcat/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tdcat/error.hpp"

namespace tdcat {

namespace {

void check_radec(double ra, double dec) {
  if (!(ra >= 0.0 && ra < 360.0)) {
    throw DomainError("ra", "must lie in [0, 360), got " + std::to_string(ra));
  }
  if (!(dec >= -90.0 && dec <= 90.0)) {
    throw DomainError("dec",
                      "must lie in [-90, 90], got " + std::to_string(dec));
  }
}

}  // namespace

void sort_by_zone_ra(std::vector<SourceRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const SourceRecord& a, const SourceRecord& b) {
              if (a.zone != b.zone) return a.zone < b.zone;
              if (a.ra != b.ra) return a.ra < b.ra;
              return a.id < b.id;
            });
}

void EngineConfig::validate() const {
  if (!(cadence_s > 0.0)) throw ConfigError("cadence_s must be > 0");
  if (!(zone_height_deg > 0.0 && zone_height_deg <= 90.0)) {
    throw ConfigError("zone_height_deg must lie in (0, 90]");
  }
  if (!(match_radius_deg > 0.0)) {
    throw ConfigError("match_radius_deg must be > 0");
  }
  if (match_radius_deg > 90.0) {
    throw ConfigError("match_radius_deg must not exceed 90");
  }
  if (!std::isfinite(mag_zero_point)) {
    throw ConfigError("mag_zero_point must be finite");
  }
  if (cameras <= 0) throw ConfigError("cameras must be > 0");
  if (sources_per_frame < 0) {
    throw ConfigError("sources_per_frame must be >= 0");
  }
  if (!(night_hours > 0.0)) throw ConfigError("night_hours must be > 0");
  if (days_per_year <= 0) throw ConfigError("days_per_year must be > 0");
  // zone ids are stored in 16 bits
  if (zone_count(zone_height_deg) > 65536) {
    throw ConfigError("zone_height_deg too small for 16-bit zone ids");
  }
}

std::int64_t EngineConfig::frames_per_night() const {
  return static_cast<std::int64_t>(
      std::floor(night_hours * 3600.0 / cadence_s + 1e-9));
}

Density parse_density(std::string_view text) {
  if (text == "full" || text == "1") return Density::kFull;
  if (text == "1/10") return Density::kTenth;
  if (text == "1/100") return Density::kHundredth;
  throw ConfigError("unknown density '" + std::string(text) +
                    "' (expected full, 1/10 or 1/100)");
}

std::string_view to_string(Density d) {
  switch (d) {
    case Density::kFull: return "full";
    case Density::kTenth: return "1/10";
    case Density::kHundredth: return "1/100";
  }
  return "full";
}

std::int64_t sources_for(Density d) {
  switch (d) {
    case Density::kFull: return 175600;
    case Density::kTenth: return 17560;
    case Density::kHundredth: return 1756;
  }
  return 175600;
}

Vec3 radec_to_cartesian(double ra, double dec) {
  check_radec(ra, dec);
  const double a = ra * kDegToRad;
  const double d = dec * kDegToRad;
  const double cd = std::cos(d);
  return {cd * std::cos(a), cd * std::sin(a), std::sin(d)};
}

SkyPosition cartesian_to_radec(const Vec3& v) {
  const double rho = std::hypot(v.x, v.y);
  double ra = std::atan2(v.y, v.x) * kRadToDeg;
  if (ra < 0.0) ra += 360.0;
  if (ra >= 360.0) ra -= 360.0;
  const double dec = std::atan2(v.z, rho) * kRadToDeg;
  return {ra, dec};
}

double angular_separation(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  const double half_chord = std::sqrt(dx * dx + dy * dy + dz * dz) * 0.5;
  return 2.0 * std::asin(std::min(1.0, half_chord)) * kRadToDeg;
}

double angular_separation(const SkyPosition& a, const SkyPosition& b) {
  return angular_separation(radec_to_cartesian(a.ra, a.dec),
                            radec_to_cartesian(b.ra, b.dec));
}

double angular_separation(const SourceRecord& a, const SourceRecord& b) {
  return angular_separation(a.unit(), b.unit());
}

ZoneId zone_count(double zone_height_deg) {
  return static_cast<ZoneId>(std::ceil(180.0 / zone_height_deg - 1e-9));
}

ZoneId zone_of(double dec, double zone_height_deg) {
  if (!(zone_height_deg > 0.0)) {
    throw ConfigError("zone height must be > 0");
  }
  if (!(dec >= -90.0 && dec <= 90.0)) {
    throw DomainError("dec", "must lie in [-90, 90]");
  }
  const auto zone =
      static_cast<ZoneId>(std::floor((dec + 90.0) / zone_height_deg));
  return std::min(zone, zone_count(zone_height_deg) - 1);
}

double mag_to_flux(double mag, double zero_point) {
  if (!std::isfinite(mag)) throw DomainError("mag", "must be finite");
  return std::pow(10.0, -0.4 * (mag - zero_point));
}

double propagate_flux_error(double flux, double mag_error) {
  if (!(flux > 0.0)) throw DomainError("flux", "must be > 0");
  if (!(mag_error >= 0.0)) {
    throw DomainError("mag_error", "must be >= 0");
  }
  return 0.4 * std::numbers::ln10 * flux * mag_error;
}

double wrap_ra(double ra) {
  double r = std::fmod(ra, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

SourceRecord make_record(std::uint64_t id, std::uint32_t imageid, double ra,
                         double dec, double mag, double mag_error,
                         const EngineConfig& config) {
  SourceRecord r;
  r.id = id;
  r.imageid = imageid;
  r.ra = ra;
  r.dec = dec;
  r.zone = static_cast<std::uint16_t>(zone_of(dec, config.zone_height_deg));
  const Vec3 v = radec_to_cartesian(ra, dec);
  r.x = v.x;
  r.y = v.y;
  r.z = v.z;
  r.mag = mag;
  r.mag_error = mag_error;
  r.flux = mag_to_flux(mag, config.mag_zero_point);
  r.flux_err = propagate_flux_error(r.flux, mag_error);
  r.calmag = mag;  // no calibration model; passthrough
  return r;
}

void validate_record(const SourceRecord& r, const EngineConfig& config) {
  check_radec(r.ra, r.dec);
  if (r.mag_error < 0.0) throw DomainError("mag_error", "must be >= 0");
  if (r.ra_err < 0.0) throw DomainError("ra_err", "must be >= 0");
  if (r.dec_err < 0.0) throw DomainError("dec_err", "must be >= 0");
  if (!(r.pixel_x >= 0.0 && r.pixel_x < kPixelExtent)) {
    throw DomainError("pixel_x", "must lie in [0, 4096)");
  }
  if (!(r.pixel_y >= 0.0 && r.pixel_y < kPixelExtent)) {
    throw DomainError("pixel_y", "must lie in [0, 4096)");
  }
  const double norm = r.x * r.x + r.y * r.y + r.z * r.z;
  if (std::abs(norm - 1.0) > 1e-9) {
    throw DomainError("x,y,z", "not a unit vector");
  }
  if (r.zone != zone_of(r.dec, config.zone_height_deg)) {
    throw DomainError("zone", "does not match declination");
  }
  const double expect = mag_to_flux(r.mag, config.mag_zero_point);
  if (std::abs(r.flux - expect) > 1e-9 * expect) {
    throw DomainError("flux", "inconsistent with mag");
  }
  if (!(r.ellipticity >= 0.0 && r.ellipticity <= 1.0)) {
    throw DomainError("ellipticity", "must lie in [0, 1]");
  }
  if (!(r.class_star >= 0.0 && r.class_star <= 1.0)) {
    throw DomainError("class_star", "must lie in [0, 1]");
  }
}

}  // namespace tdcat
