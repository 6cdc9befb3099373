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
#include "tdcat/capacity.hpp"

#include <array>
#include <cstdio>
#include <ostream>

#include "tdcat/error.hpp"

namespace tdcat {

std::vector<CapacityRow> capacity_plan(const EngineConfig& config,
                                       std::int64_t days,
                                       double bytes_per_record) {
  config.validate();
  if (days < 0) throw ConfigError("days must be >= 0");
  if (!(bytes_per_record > 0.0)) {
    throw ConfigError("bytes_per_record must be > 0");
  }
  std::vector<int> cameras = {1};
  if (config.cameras != 1) cameras.push_back(config.cameras);
  std::vector<CapacityRow> rows;
  const auto per_camera_day =
      static_cast<std::uint64_t>(config.frames_per_night()) *
      static_cast<std::uint64_t>(config.sources_per_frame);
  for (int c : cameras) {
    CapacityRow row;
    row.cameras = c;
    row.days = days;
    row.records = per_camera_day * static_cast<std::uint64_t>(c) *
                  static_cast<std::uint64_t>(days);
    row.bytes = static_cast<double>(row.records) * bytes_per_record;
    rows.push_back(row);
  }
  return rows;
}

std::vector<CapacityRow> survey_plan(const EngineConfig& config,
                                     double bytes_per_record) {
  std::vector<CapacityRow> rows;
  const std::int64_t year = config.days_per_year;
  for (std::int64_t days : {std::int64_t{1}, year, 10 * year}) {
    for (const auto& r : capacity_plan(config, days, bytes_per_record)) {
      rows.push_back(r);
    }
  }
  return rows;
}

std::string format_bytes(double bytes) {
  static constexpr std::array<const char*, 7> kUnits = {
      "B", "KiB", "MiB", "GiB", "TiB", "PiB", "EiB"};
  std::size_t unit = 0;
  while (bytes >= 1024.0 && unit + 1 < kUnits.size()) {
    bytes /= 1024.0;
    ++unit;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f %s", bytes, kUnits[unit]);
  return buf;
}

void write_plan_csv(std::ostream& out, const std::vector<CapacityRow>& rows) {
  out << "cameras,days,records,bytes,size\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%lld,%.4g,%.6g,%s\n", r.cameras,
                  static_cast<long long>(r.days),
                  static_cast<double>(r.records), r.bytes,
                  format_bytes(r.bytes).c_str());
    out << buf;
  }
}

}  // namespace tdcat
