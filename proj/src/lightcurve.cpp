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
#include "tdcat/lightcurve.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "tdcat/error.hpp"
#include "tdcat/text.hpp"

namespace tdcat {

std::vector<double> LightCurve::epochs() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.epoch);
  return out;
}

std::vector<double> LightCurve::magnitudes() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.calmag);
  return out;
}

CurvePoint to_point(const SourceRecord& r, double epoch) {
  return {epoch, r.calmag, r.mag_error, r.flux, r.flux_err};
}

CurvePoint to_point(const StoredRecord& r) {
  return to_point(r.source, r.epoch);
}

void CurveSet::append_points(const FrameBatch& frame,
                             const MatchResult& matches) {
  if (matches.per_record.size() != frame.records.size()) {
    throw DomainError("matches", "do not correspond to this frame");
  }
  std::vector<StarId> touched;
  for (const auto& a : matches.per_record) {
    if (a.matched()) touched.push_back(a.star_id);
  }
  std::sort(touched.begin(), touched.end());
  const auto dup = std::adjacent_find(touched.begin(), touched.end());
  if (dup != touched.end()) {
    throw SequencingError("star " + std::to_string(*dup) +
                          " received two points at epoch " +
                          text::format(frame.epoch));
  }
  for (StarId id : touched) {
    const auto it = curves_.find(id);
    if (it != curves_.end() && !it->second.empty() &&
        !(frame.epoch > it->second.last_epoch())) {
      throw SequencingError("epoch regression for star " + std::to_string(id));
    }
  }
  for (std::size_t i = 0; i < frame.records.size(); ++i) {
    const Assignment& a = matches.per_record[i];
    if (!a.matched()) continue;
    LightCurve& curve = curves_[a.star_id];
    curve.star_id = a.star_id;
    curve.points.push_back(to_point(frame.records[i], frame.epoch));
    ++total_points_;
  }
}

const LightCurve* CurveSet::find(StarId star_id) const {
  const auto it = curves_.find(star_id);
  return it == curves_.end() ? nullptr : &it->second;
}

LightCurve query_curve(std::span<const StoreSnapshot> stores, StarId star_id,
                       double epoch_lo, double epoch_hi) {
  LightCurve curve;
  curve.star_id = star_id;
  if (star_id == kNoStar || epoch_hi < epoch_lo) return curve;
  std::vector<StoredRecord> rows;
  for (const auto& store : stores) {
    auto part = store.query_star(star_id, epoch_lo, epoch_hi);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::sort(rows.begin(), rows.end(), base_order);
  curve.points.reserve(rows.size());
  for (const auto& r : rows) curve.points.push_back(to_point(r));
  return curve;
}

void write_curve_csv(std::ostream& out, const LightCurve& curve) {
  out << "epoch,calmag,mag_error,flux,flux_err\n";
  std::string line;
  for (const auto& p : curve.points) {
    line.clear();
    text::append(line, p.epoch);
    for (double v : {p.calmag, p.mag_error, p.flux, p.flux_err}) {
      line += ',';
      text::append(line, v);
    }
    line += '\n';
    out << line;
  }
}

}  // namespace tdcat
