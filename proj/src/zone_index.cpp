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
#include "tdcat/zone_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tdcat {

std::vector<CatalogPoint> points_of(std::span<const SourceRecord> records) {
  std::vector<CatalogPoint> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back({static_cast<std::int64_t>(r.id), r.ra, r.dec});
  }
  return out;
}

ZoneIndex ZoneIndex::build(std::span<const CatalogPoint> points,
                           double zone_height_deg) {
  ZoneIndex index;
  index.zone_height_ = zone_height_deg;
  if (points.empty()) return index;

  std::vector<ZoneId> zone(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    zone[i] = zone_of(points[i].dec, zone_height_deg);
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (zone[a] != zone[b]) return zone[a] < zone[b];
    if (points[a].ra != points[b].ra) return points[a].ra < points[b].ra;
    if (points[a].id != points[b].id) return points[a].id < points[b].id;
    return points[a].dec < points[b].dec;
  });

  index.min_zone_ = zone[order.front()];
  index.max_zone_ = zone[order.back()];
  const auto span_zones =
      static_cast<std::size_t>(index.max_zone_ - index.min_zone_ + 1);
  index.offsets_.assign(span_zones + 1, 0);

  const std::size_t n = points.size();
  index.ids_.resize(n);
  index.ra_.resize(n);
  index.dec_.resize(n);
  index.unit_.resize(n);
  for (std::size_t slot = 0; slot < n; ++slot) {
    const auto& p = points[order[slot]];
    index.ids_[slot] = p.id;
    index.ra_[slot] = p.ra;
    index.dec_[slot] = p.dec;
    index.unit_[slot] = radec_to_cartesian(p.ra, p.dec);
    ++index.offsets_[static_cast<std::size_t>(zone[order[slot]] -
                                              index.min_zone_) + 1];
  }
  std::partial_sum(index.offsets_.begin(), index.offsets_.end(),
                   index.offsets_.begin());
  return index;
}

std::vector<ZoneId> ZoneIndex::zones() const {
  std::vector<ZoneId> out;
  for (ZoneId z = min_zone_; z <= max_zone_; ++z) {
    const auto [lo, hi] = zone_range(z);
    if (hi > lo) out.push_back(z);
  }
  return out;
}

std::pair<std::size_t, std::size_t> ZoneIndex::zone_range(
    ZoneId zone) const noexcept {
  if (ids_.empty() || zone < min_zone_ || zone > max_zone_) return {0, 0};
  const auto k = static_cast<std::size_t>(zone - min_zone_);
  return {offsets_[k], offsets_[k + 1]};
}

double ra_search_halfwidth(double dec, double radius_deg) {
  const double adec = std::abs(dec);
  if (adec > 89.9 || adec + radius_deg >= 90.0) return 360.0;
  const double s = std::sin(radius_deg * kDegToRad) /
                   std::cos(dec * kDegToRad);
  if (s >= 1.0) return 360.0;
  // Tangent-point bound, never narrower than radius / cos(dec). Padded for
  // rounding.
  const double w = std::asin(s) * kRadToDeg;
  return w * (1.0 + 1e-9) + 1e-12;
}

}  // namespace tdcat
