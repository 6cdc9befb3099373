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
#include <iosfwd>
#include <span>
#include <vector>

#include "tdcat/catalog.hpp"
#include "tdcat/zone_index.hpp"

namespace tdcat {

struct Match {
  std::uint64_t record_id{0};
  StarId star_id{kNoStar};
  double separation_deg{0.0};

  friend bool operator==(const Match&, const Match&) = default;
};

/// Per-record outcome, aligned with the frame's record order.
struct Assignment {
  StarId star_id{kNoStar};
  double separation_deg{0.0};

  bool matched() const noexcept { return star_id != kNoStar; }
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct MatchResult {
  std::vector<Match> matched;            // frame order
  std::vector<std::uint64_t> unmatched;  // frame order; transient candidates
  std::size_t ambiguous_count{0};        // records with > 1 candidate
  std::vector<Assignment> per_record;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

struct JoinOptions {
  /// OpenMP team size for the parallel kernel; 0 uses the runtime default.
  int threads{0};
};

/// RangeJoin: nearest template star within radius for every record, ties
/// broken by smaller star id. Candidates come only from zones within
/// ceil(radius / zone_height) of the record's zone and from the ra window
/// given by ra_search_halfwidth, with the 0/360 seam handled as two
/// intervals. Throws ConfigError for radius outside (0, 90].
MatchResult range_join(std::span<const SourceRecord> records,
                       const ZoneIndex& templ, double radius_deg,
                       JoinOptions options = {});

MatchResult range_join(const FrameBatch& frame, const ZoneIndex& templ,
                       double radius_deg, JoinOptions options = {});

/// Single-threaded reference kernel. Same contract; kept for testing and
/// benchmarking against the OpenMP path.
MatchResult range_join_serial(std::span<const SourceRecord> records,
                              const ZoneIndex& templ, double radius_deg);

/// Match file rows "frame_record_id,star_id,separation", one per matched
/// record in frame order.
void write_matches_csv(std::ostream& out, const MatchResult& result, bool header = true);
/// Candidate file rows "frame_record_id", one per unmatched record.
void write_candidates_csv(std::ostream& out, const MatchResult& result,
                          bool header = true);

/// Assembles matched/unmatched lists from per-record assignments.
MatchResult finalize_matches(std::span<const SourceRecord> records,
                             std::vector<Assignment> per_record,
                             std::size_t ambiguous_count);

struct CrossmatchTiming {
  std::size_t frame_size{0};
  std::size_t template_size{0};
  double radius_deg{0.0};
  double build_s{0.0};
  double join_s{0.0};
  std::size_t matched{0};

  double total_s() const noexcept { return build_s + join_s; }
  double records_per_s() const noexcept {
    return total_s() > 0.0 ? static_cast<double>(frame_size) / total_s() : 0.0;
  }
};

/// Times template index build plus one join of the given frame.
CrossmatchTiming crossmatch_throughput(std::span<const SourceRecord> frame,
                                       std::span<const CatalogPoint> templ,
                                       double radius_deg,
                                       double zone_height_deg,
                                       JoinOptions options = {});

}  // namespace tdcat
