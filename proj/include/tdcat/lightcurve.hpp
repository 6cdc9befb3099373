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
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "tdcat/catalog.hpp"
#include "tdcat/crossmatch.hpp"
#include "tdcat/delta_store.hpp"

namespace tdcat {

struct CurvePoint {
  double epoch{0.0};
  double calmag{0.0};
  double mag_error{0.0};
  double flux{0.0};
  double flux_err{0.0};

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct LightCurve {
  StarId star_id{kNoStar};
  std::vector<CurvePoint> points;  // strictly increasing epoch

  bool empty() const noexcept { return points.empty(); }
  double first_epoch() const { return points.front().epoch; }
  double last_epoch() const { return points.back().epoch; }
  std::vector<double> epochs() const;
  std::vector<double> magnitudes() const;

  friend bool operator==(const LightCurve&, const LightCurve&) = default;
};

CurvePoint to_point(const SourceRecord& r, double epoch);
CurvePoint to_point(const StoredRecord& r);

/// Live curves for a set of stars.
class CurveSet {
 public:
  /// Appends one point per matched record. All-or-nothing: throws
  /// SequencingError (and changes nothing) if any star would receive a
  /// point at or before its last epoch, including two points in one frame.
  void append_points(const FrameBatch& frame, const MatchResult& matches);

  const LightCurve* find(StarId star_id) const;
  std::size_t size() const noexcept { return curves_.size(); }
  std::size_t total_points() const noexcept { return total_points_; }
  const std::unordered_map<StarId, LightCurve>& curves() const noexcept {
    return curves_;
  }

 private:
  std::unordered_map<StarId, LightCurve> curves_;
  std::size_t total_points_{0};
};

/// Materializes a curve from stored history across partitions and layers.
/// Unknown stars and empty ranges yield an empty curve.
LightCurve query_curve(std::span<const StoreSnapshot> stores, StarId star_id,
                       double epoch_lo, double epoch_hi);

void write_curve_csv(std::ostream& out, const LightCurve& curve);

}  // namespace tdcat
