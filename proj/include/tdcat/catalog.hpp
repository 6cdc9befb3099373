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
#pragma once

// Core catalog types: the per-source measurement row, frame batches, engine
// configuration and the coordinate / photometry conversions every other
// module builds on.

#include <array>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace tdcat {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

using StarId = std::int64_t;
/// Star id carried by records that matched nothing (transient candidates).
inline constexpr StarId kNoStar = -1;

using ZoneId = std::int32_t;

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};
};

struct SkyPosition {
  double ra{0.0};   // degrees [0, 360)
  double dec{0.0};  // degrees [-90, 90]

  friend bool operator==(const SkyPosition&, const SkyPosition&) = default;
};

/// One extracted measurement. Field order is the storage column order.
struct SourceRecord {
  std::uint64_t id{0};
  std::uint32_t imageid{0};
  std::uint16_t zone{0};
  double ra{0.0};
  double dec{0.0};
  double mag{0.0};
  double mag_error{0.0};
  double pixel_x{0.0};
  double pixel_y{0.0};
  double ra_err{0.0};
  double dec_err{0.0};
  double x{1.0};
  double y{0.0};
  double z{0.0};
  double flux{0.0};
  double flux_err{0.0};
  double calmag{0.0};
  std::uint32_t flag{0};
  double background{0.0};
  double threshold{0.0};
  double ellipticity{0.0};
  double class_star{0.0};

  Vec3 unit() const noexcept { return {x, y, z}; }
  SkyPosition position() const noexcept { return {ra, dec}; }

  friend bool operator==(const SourceRecord&, const SourceRecord&) = default;
};

/// Column names in storage order; also the CSV interchange header.
inline constexpr std::array<std::string_view, 22> kSourceColumns = {
    "id",       "imageid", "zone",     "ra",     "dec",        "mag",
    "mag_error", "pixel_x", "pixel_y",  "ra_err", "dec_err",    "x",
    "y",        "z",       "flux",     "flux_err", "calmag",   "flag",
    "background", "threshold", "ellipticity", "class_star"};

inline constexpr double kPixelExtent = 4096.0;

/// All records from one camera for one exposure.
struct FrameBatch {
  int camera_id{0};
  std::uint32_t imageid{0};
  double epoch{0.0};  // seconds
  std::vector<SourceRecord> records;
};

/// Orders records by (zone, ra, id); the emission order of a frame.
void sort_by_zone_ra(std::vector<SourceRecord>& records);

struct EngineConfig {
  double cadence_s{15.0};
  double zone_height_deg{0.01};
  double match_radius_deg{0.003};
  double mag_zero_point{25.0};
  int cameras{36};
  std::int64_t sources_per_frame{175600};
  double night_hours{8.0};
  int days_per_year{260};

  /// Throws ConfigError on the first violated constraint.
  void validate() const;
  std::int64_t frames_per_night() const;
};

enum class Density { kFull, kTenth, kHundredth };

Density parse_density(std::string_view text);  // "full", "1/10", "1/100"
std::string_view to_string(Density d);
std::int64_t sources_for(Density d);

// Conversions. All angles are degrees.

Vec3 radec_to_cartesian(double ra, double dec);
SkyPosition cartesian_to_radec(const Vec3& v);

/// Great-circle separation via the chord length; stable at small angles.
double angular_separation(const Vec3& a, const Vec3& b);
double angular_separation(const SkyPosition& a, const SkyPosition& b);
double angular_separation(const SourceRecord& a, const SourceRecord& b);

/// Number of zones covering [-90, 90] for the given strip height.
ZoneId zone_count(double zone_height_deg);
ZoneId zone_of(double dec, double zone_height_deg);

double mag_to_flux(double mag, double zero_point);
double propagate_flux_error(double flux, double mag_error);

/// Wraps any finite angle into [0, 360).
double wrap_ra(double ra);

/// Builds a record from the primary measurements, deriving zone, unit
/// vector, flux, flux_err and calmag. Diagnostics are left at zero.
SourceRecord make_record(std::uint64_t id, std::uint32_t imageid, double ra,
                         double dec, double mag, double mag_error,
                         const EngineConfig& config);

/// Throws DomainError naming the first field that breaks a record invariant.
void validate_record(const SourceRecord& r, const EngineConfig& config);

}  // namespace tdcat
