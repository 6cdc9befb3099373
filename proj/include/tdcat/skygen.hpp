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

// Deterministic synthetic sky: a template population plus per-epoch frames
// with Gaussian jitter and box-profile transient injections.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdcat/catalog.hpp"
#include "tdcat/zone_index.hpp"

namespace tdcat {

struct Footprint {
  double ra_min{0.0};
  double ra_max{360.0};
  double dec_min{-90.0};
  double dec_max{90.0};

  double area_deg2() const;
  bool contains(double ra, double dec) const;
};

struct SkyModel {
  std::uint64_t seed{1};
  std::int64_t star_count{0};
  Footprint footprint{};
  double mag_bright{10.0};
  double mag_faint{16.0};
  double astrometric_sigma_deg{1.0 / 3600.0};  // placeholder: 1 arcsec
  double photometric_sigma_mag{0.02};          // placeholder
  /// Rejection radius between template stars; 0 gives a pure Poisson field.
  double min_separation_deg{0.0};
  /// Added to the 1-based star index to form star ids.
  StarId star_id_offset{0};
  int camera_id{0};

  void validate() const;
};

struct TemplateStar {
  StarId star_id{0};
  double ra{0.0};
  double dec{0.0};
  double mag{0.0};
};

/// Reference stars sorted by (zone, ra) plus the matching zone index.
struct TemplateCatalog {
  std::vector<TemplateStar> stars;
  ZoneIndex index;

  /// (star_id, position in `stars`) sorted by id.
  std::vector<std::pair<StarId, std::size_t>> id_lookup;

  std::vector<CatalogPoint> points() const;
  /// Position in `stars` of a star id, or -1.
  std::ptrdiff_t find(StarId id) const;
};

TemplateCatalog make_template(std::vector<TemplateStar> stars,
                              double zone_height_deg);

TemplateCatalog build_template(const SkyModel& model,
                               const EngineConfig& config);

enum class InjectionKind { kNewSource, kBrightening };

std::string_view to_string(InjectionKind k);
InjectionKind parse_injection_kind(std::string_view text);

/// Box-profile transient active for epochs in [epoch_on, epoch_off).
/// For brightening, delta_mag < 0 brightens and > 0 dims.
struct TransientInjection {
  InjectionKind kind{InjectionKind::kNewSource};
  double epoch_on{0.0};
  double epoch_off{0.0};
  SkyPosition position{};
  double delta_mag{0.0};
  StarId target_star{kNoStar};
  double mag{12.0};  // new_source brightness

  bool active_at(double epoch) const noexcept {
    return epoch >= epoch_on && epoch < epoch_off;
  }
  void validate() const;
};

/// imageid = camera in the top 8 bits, frame sequence in the low 24.
std::uint32_t make_imageid(int camera_id, std::int64_t frame_seq);
std::uint64_t make_record_id(std::uint32_t imageid, std::uint32_t index);

/// Generates the frame observed at `epoch`. Throws SequencingError if the
/// epoch is not a multiple of the cadence.
FrameBatch observe_frame(const TemplateCatalog& templ, double epoch,
                         std::span<const TransientInjection> injections,
                         const SkyModel& model, const EngineConfig& config);

/// Truth sidecar: header then one injection per line.
void write_truth_log(std::ostream& out,
                     std::span<const TransientInjection> injections);
std::vector<TransientInjection> read_truth_log(std::istream& in);

/// Template sidecar: `star_id,ra,dec,mag`, one star per line.
void write_template_csv(std::ostream& out, const TemplateCatalog& templ);
std::vector<TemplateStar> read_template_csv(std::istream& in);

/// Footprint of a camera in the simulated 36-camera array: 18 ra columns of
/// 20 degrees by two 7-degree declination rows straddling the equator.
Footprint camera_footprint(int camera_id);

/// Smallest template spacing for which every jittered record is strictly
/// nearer its own star than any other (jitter is truncated at 5 sigma).
double unambiguous_separation(double astrometric_sigma_deg);

}  // namespace tdcat
