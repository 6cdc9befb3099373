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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tdcat/catalog.hpp"

namespace tdcat {

struct CapacityRow {
  int cameras{0};
  std::int64_t days{0};
  std::uint64_t records{0};
  double bytes{0.0};
};

/// Storage projection: records = cameras * frames_per_night *
/// sources_per_frame * days, bytes = records * bytes_per_record. Rows cover
/// one camera and config.cameras (deduplicated when equal).
std::vector<CapacityRow> capacity_plan(const EngineConfig& config,
                                       std::int64_t days,
                                       double bytes_per_record);

/// One day, one observing year and ten years for 1 and N cameras.
std::vector<CapacityRow> survey_plan(const EngineConfig& config,
                                     double bytes_per_record);

/// "61.6 GiB" style, binary prefixes.
std::string format_bytes(double bytes);

void write_plan_csv(std::ostream& out, const std::vector<CapacityRow>& rows);

}  // namespace tdcat
