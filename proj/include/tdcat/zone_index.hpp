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

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tdcat/catalog.hpp"

namespace tdcat {

/// Minimal positional view of anything that can be indexed.
struct CatalogPoint {
  std::int64_t id{0};
  double ra{0.0};
  double dec{0.0};
};

std::vector<CatalogPoint> points_of(std::span<const SourceRecord> records);

/// Declination strips of fixed height, each holding its members sorted by
/// ra. Storage is columnar and contiguous: zone k occupies
/// [offsets[k - min_zone], offsets[k - min_zone + 1]).
///
/// Immutable after build, so concurrent readers need no locking.
class ZoneIndex {
 public:
  ZoneIndex() = default;

  static ZoneIndex build(std::span<const CatalogPoint> points,
                         double zone_height_deg);

  double zone_height() const noexcept { return zone_height_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  /// Zone ids that hold at least one member, ascending.
  std::vector<ZoneId> zones() const;
  ZoneId min_zone() const noexcept { return min_zone_; }
  ZoneId max_zone() const noexcept { return max_zone_; }

  /// Half-open slot range of a zone; empty for zones outside the index.
  std::pair<std::size_t, std::size_t> zone_range(ZoneId zone) const noexcept;

  std::int64_t id(std::size_t slot) const noexcept { return ids_[slot]; }
  double ra(std::size_t slot) const noexcept { return ra_[slot]; }
  double dec(std::size_t slot) const noexcept { return dec_[slot]; }
  const Vec3& unit(std::size_t slot) const noexcept { return unit_[slot]; }
  std::span<const double> ra_column() const noexcept { return ra_; }

 private:
  double zone_height_{0.01};
  ZoneId min_zone_{0};
  ZoneId max_zone_{-1};
  std::vector<std::size_t> offsets_;
  std::vector<std::int64_t> ids_;
  std::vector<double> ra_;
  std::vector<double> dec_;
  std::vector<Vec3> unit_;
};

/// Half-width in ra (degrees) of the box that contains every point within
/// radius of a point at declination dec. Returns >= 180 when the search must
/// scan the full circle (pole clamp).
double ra_search_halfwidth(double dec, double radius_deg);

}  // namespace tdcat
