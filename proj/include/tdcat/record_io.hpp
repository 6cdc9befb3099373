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

// On-disk formats.
//
// Binary segment ("TDS1"), all integers and doubles little-endian:
//
//   offset  size  field
//   0       4     magic "TDS1"
//   4       8     record count (u64)
//   12      190   record 0
//   ...
//
// Record layout (190 bytes, no padding). The 22 catalog columns come first in
// catalog order (162 bytes), followed by the match trailer (28 bytes):
//
//   0   u64 id          8   u32 imageid    12  u16 zone
//   14  f64 ra          22  f64 dec        30  f64 mag
//   38  f64 mag_error   46  f64 pixel_x    54  f64 pixel_y
//   62  f64 ra_err      70  f64 dec_err    78  f64 x
//   86  f64 y           94  f64 z          102 f64 flux
//   110 f64 flux_err    118 f64 calmag     126 u32 flag
//   130 f64 background  138 f64 threshold  146 f64 ellipticity
//   154 f64 class_star
//   162 i64 star_id (-1 when unmatched)
//   170 f64 epoch (seconds)
//   178 f64 separation_deg (0 when unmatched)
//   186 u32 status (0 matched, 1 transient candidate)
//
// CSV interchange: a header naming the 22 catalog columns in the order above,
// then one row per record.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tdcat/catalog.hpp"

namespace tdcat {

enum class RecordStatus : std::uint32_t { kMatched = 0, kCandidate = 1 };

/// A catalog row plus its cross-match outcome and observation epoch.
struct StoredRecord {
  SourceRecord source;
  StarId star_id{kNoStar};
  double epoch{0.0};
  double separation_deg{0.0};
  RecordStatus status{RecordStatus::kCandidate};

  friend bool operator==(const StoredRecord&, const StoredRecord&) = default;
};

inline constexpr std::size_t kCatalogRowBytes = 162;
inline constexpr std::size_t kRecordBytes = 190;
inline constexpr std::size_t kSegmentHeaderBytes = 12;
inline constexpr std::array<char, 4> kSegmentMagic = {'T', 'D', 'S', '1'};

void encode_record(const StoredRecord& record, std::byte* out);
StoredRecord decode_record(const std::byte* in);

std::vector<std::byte> encode_segment(std::span<const StoredRecord> records);
/// Throws StorageError on a bad magic or a truncated body.
std::vector<StoredRecord> decode_segment(std::span<const std::byte> bytes);

std::vector<std::byte> read_file(const std::filesystem::path& path);

/// Writes `bytes` to a sibling temp file, optionally fsyncs, then renames
/// over `path`. On failure the temp file is removed and StorageError thrown;
/// `path` is never left holding a partial file.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::byte> bytes, bool sync);

void write_segment_file(const std::filesystem::path& path,
                        std::span<const StoredRecord> records, bool sync);
std::vector<StoredRecord> read_segment_file(const std::filesystem::path& path);

/// Orders records by (star_id, epoch, record id): the base-run key.
bool base_order(const StoredRecord& a, const StoredRecord& b);

// CSV interchange.

std::string csv_header();
/// Appends one CSV row (no newline) in csv_header() column order.
void append_csv_row(std::string& line, const SourceRecord& r);
void write_csv(std::ostream& out, std::span<const SourceRecord> records);
/// Throws DomainError if the header does not match exactly.
std::vector<SourceRecord> read_csv(std::istream& in);

void write_csv_file(const std::filesystem::path& path,
                    std::span<const SourceRecord> records);
std::vector<SourceRecord> read_csv_file(const std::filesystem::path& path);

}  // namespace tdcat
