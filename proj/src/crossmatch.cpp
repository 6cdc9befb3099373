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
#include "tdcat/crossmatch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tdcat/error.hpp"
#include "tdcat/text.hpp"

namespace tdcat {

namespace {

void check_radius(double radius_deg) {
  if (!(radius_deg > 0.0)) {
    throw ConfigError("match radius must be > 0, got " +
                      std::to_string(radius_deg));
  }
  if (radius_deg > 90.0) {
    throw ConfigError("match radius must not exceed 90 degrees, got " +
                      std::to_string(radius_deg));
  }
}

struct Probe {
  Vec3 unit;
  double radius;
  double chord2_max;  // loose prefilter on squared chord length
  Assignment best;
  int in_radius{0};

  void consider(const ZoneIndex& index, std::size_t slot) {
    const Vec3& u = index.unit(slot);
    const double dx = u.x - unit.x;
    const double dy = u.y - unit.y;
    const double dz = u.z - unit.z;
    if (dx * dx + dy * dy + dz * dz > chord2_max) return;
    const double sep = angular_separation(unit, u);
    if (sep > radius) return;
    ++in_radius;
    const StarId id = index.id(slot);
    if (!best.matched() || sep < best.separation_deg ||
        (sep == best.separation_deg && id < best.star_id)) {
      best = {id, sep};
    }
  }

  void scan(const ZoneIndex& index, std::size_t lo, std::size_t hi,
            double ra_lo, double ra_hi) {
    const auto ra = index.ra_column();
    auto first = std::lower_bound(ra.begin() + static_cast<std::ptrdiff_t>(lo),
                                  ra.begin() + static_cast<std::ptrdiff_t>(hi),
                                  ra_lo);
    for (auto it = first; it != ra.begin() + static_cast<std::ptrdiff_t>(hi) &&
                          *it <= ra_hi;
         ++it) {
      consider(index, static_cast<std::size_t>(it - ra.begin()));
    }
  }
};

Assignment match_one(const SourceRecord& record, const ZoneIndex& index,
                     double radius_deg, double chord2_max, bool& ambiguous) {
  Probe probe{record.unit(), radius_deg, chord2_max, {}, 0};
  const double h = index.zone_height();
  const ZoneId home = zone_of(record.dec, h);
  const auto reach = static_cast<ZoneId>(std::ceil(radius_deg / h));
  const ZoneId zlo = std::max(home - reach, index.min_zone());
  const ZoneId zhi = std::min(home + reach, index.max_zone());
  const double half = ra_search_halfwidth(record.dec, radius_deg);

  for (ZoneId z = zlo; z <= zhi; ++z) {
    const auto [lo, hi] = index.zone_range(z);
    if (lo == hi) continue;
    if (half >= 180.0) {
      for (std::size_t s = lo; s < hi; ++s) probe.consider(index, s);
      continue;
    }
    const double a = record.ra - half;
    const double b = record.ra + half;
    if (a < 0.0) {
      probe.scan(index, lo, hi, 0.0, b);
      probe.scan(index, lo, hi, a + 360.0, 360.0);
    } else if (b >= 360.0) {
      probe.scan(index, lo, hi, a, 360.0);
      probe.scan(index, lo, hi, 0.0, b - 360.0);
    } else {
      probe.scan(index, lo, hi, a, b);
    }
  }
  ambiguous = probe.in_radius > 1;
  return probe.best;
}

double chord2_bound(double radius_deg) {
  const double c = 2.0 * std::sin(0.5 * radius_deg * kDegToRad);
  return c * c * (1.0 + 1e-6) + 1e-18;
}

}  // namespace

MatchResult finalize_matches(std::span<const SourceRecord> records,
                             std::vector<Assignment> per_record,
                             std::size_t ambiguous_count) {
  MatchResult result;
  result.ambiguous_count = ambiguous_count;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Assignment& a = per_record[i];
    if (a.matched()) {
      result.matched.push_back({records[i].id, a.star_id, a.separation_deg});
    } else {
      result.unmatched.push_back(records[i].id);
    }
  }
  result.per_record = std::move(per_record);
  return result;
}

MatchResult range_join_serial(std::span<const SourceRecord> records,
                              const ZoneIndex& templ, double radius_deg) {
  check_radius(radius_deg);
  const double chord2_max = chord2_bound(radius_deg);
  std::vector<Assignment> per_record(records.size());
  std::size_t ambiguous = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    bool amb = false;
    per_record[i] = match_one(records[i], templ, radius_deg, chord2_max, amb);
    ambiguous += amb ? 1 : 0;
  }
  return finalize_matches(records, std::move(per_record), ambiguous);
}

MatchResult range_join(std::span<const SourceRecord> records,
                       const ZoneIndex& templ, double radius_deg,
                       JoinOptions options) {
  check_radius(radius_deg);
  const double chord2_max = chord2_bound(radius_deg);
  std::vector<Assignment> per_record(records.size());
  const auto n = static_cast<std::ptrdiff_t>(records.size());
  std::size_t ambiguous = 0;
#ifdef _OPENMP
  const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) reduction(+ : ambiguous) \
    num_threads(threads) if (n > 4096)
#else
  (void)options;
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    bool amb = false;
    per_record[static_cast<std::size_t>(i)] = match_one(
        records[static_cast<std::size_t>(i)], templ, radius_deg, chord2_max,
        amb);
    ambiguous += amb ? 1 : 0;
  }
  return finalize_matches(records, std::move(per_record), ambiguous);
}

MatchResult range_join(const FrameBatch& frame, const ZoneIndex& templ,
                       double radius_deg, JoinOptions options) {
  return range_join(std::span<const SourceRecord>(frame.records), templ,
                    radius_deg, options);
}

CrossmatchTiming crossmatch_throughput(std::span<const SourceRecord> frame,
                                       std::span<const CatalogPoint> templ,
                                       double radius_deg,
                                       double zone_height_deg,
                                       JoinOptions options) {
  using clock = std::chrono::steady_clock;
  CrossmatchTiming t;
  t.frame_size = frame.size();
  t.template_size = templ.size();
  t.radius_deg = radius_deg;
  const auto t0 = clock::now();
  const ZoneIndex index = ZoneIndex::build(templ, zone_height_deg);
  const auto t1 = clock::now();
  const MatchResult result = range_join(frame, index, radius_deg, options);
  const auto t2 = clock::now();
  t.build_s = std::chrono::duration<double>(t1 - t0).count();
  t.join_s = std::chrono::duration<double>(t2 - t1).count();
  t.matched = result.matched.size();
  return t;
}

void write_matches_csv(std::ostream& out, const MatchResult& result, bool header) {
  if (header) out << "frame_record_id,star_id,separation\n";
  std::string line;
  for (const auto& m : result.matched) {
    line.clear();
    text::append(line, m.record_id);
    line += ',';
    text::append(line, m.star_id);
    line += ',';
    text::append(line, m.separation_deg);
    line += '\n';
    out << line;
  }
}

void write_candidates_csv(std::ostream& out, const MatchResult& result, bool header) {
  if (header) out << "frame_record_id\n";
  std::string line;
  for (auto id : result.unmatched) {
    line.clear();
    text::append(line, id);
    line += '\n';
    out << line;
  }
}

}  // namespace tdcat
