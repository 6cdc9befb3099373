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

// Per-partition storage: an append-only delta log of frame segments for the
// current night, folded nightly into a single sorted base run.
//
// Directory layout under <root>/partition-NN/:
//
//   CURRENT                      commit record (text, replaced atomically)
//   base-<gen>.tds               base run, records in (star_id, epoch, id)
//   base-<gen>.idx               run index: star_id -> (first, count)
//   night-<night>/seg-<seq>-<epoch_ms>.tds   delta segments
//
// A segment becomes visible only when renamed into place, so readers never
// observe partial writes. A merge stages the new base generation next to the
// old one and commits by replacing CURRENT; anything not referenced by
// CURRENT is garbage and is removed on open or by the next merge.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tdcat/catalog.hpp"
#include "tdcat/crossmatch.hpp"
#include "tdcat/record_io.hpp"

namespace tdcat {

struct StoreOptions {
  /// fsync segments and directory entries before acknowledging.
  bool sync{true};
  /// Partition capacity in bytes; 0 is unlimited. An append that would
  /// exceed it fails like a full disk.
  std::uint64_t capacity_bytes{0};
};

struct AppendAck {
  std::uint64_t segment_seq{0};
  std::size_t records{0};
  double epoch{0.0};
  double ingest_latency_s{0.0};
};

struct StorageStats {
  std::uint64_t records_ingested{0};
  std::uint64_t segments{0};
  std::uint64_t bytes_on_disk{0};
  double ingest_latency_s{0.0};
  double merge_duration_s{0.0};
};

struct MergeReport {
  std::int64_t night_id{0};
  bool noop{false};
  std::size_t segments_merged{0};
  std::size_t records_merged{0};
  std::size_t base_records{0};
  std::uint64_t base_generation{0};
  double duration_s{0.0};
};

enum class MergePhase {
  kStaged,     // new base files on disk, CURRENT not yet replaced
  kCommitted,  // CURRENT replaced, old files not yet removed
};

/// Called at each merge phase; throwing aborts the merge there.
using MergeHook = std::function<void(MergePhase)>;

struct SegmentRef {
  std::filesystem::path path;
  std::int64_t night{0};
  std::uint64_t seq{0};
  double epoch{0.0};
};

struct BaseIndexEntry {
  StarId star_id{0};
  std::uint64_t first{0};
  std::uint64_t count{0};
};

/// Point-in-time view of a partition: the committed base run plus every
/// complete delta segment that existed when it was taken. Valid until the
/// next merge of that partition.
class StoreSnapshot {
 public:
  int partition_id() const noexcept { return partition_id_; }
  const std::vector<SegmentRef>& segments() const noexcept { return segments_; }
  std::optional<std::filesystem::path> base_file() const { return base_file_; }
  std::uint64_t base_generation() const noexcept { return base_gen_; }

  std::vector<StoredRecord> read_base() const;
  std::vector<StoredRecord> read_delta() const;
  /// Base then delta; the full history visible to this snapshot.
  std::vector<StoredRecord> read_all() const;

  /// Records of one star with epoch in [epoch_lo, epoch_hi], in epoch order.
  std::vector<StoredRecord> query_star(StarId star_id, double epoch_lo,
                                       double epoch_hi) const;

 private:
  friend class NightStore;
  static StoreSnapshot build(const std::filesystem::path& dir,
                             int partition_id, std::uint64_t base_gen,
                             const std::vector<std::int64_t>& merged_nights);
  int partition_id_{0};
  std::uint64_t base_gen_{0};
  std::optional<std::filesystem::path> base_file_;
  std::optional<std::filesystem::path> base_index_;
  std::vector<SegmentRef> segments_;
};

class NightStore {
 public:
  /// Opens (creating if needed) partition `partition_id` under `root`, with
  /// `night_id` as the night receiving appends. Recovers from interrupted
  /// appends and merges; throws ConcurrencyError while another handle holds
  /// the partition lock.
  static NightStore open(const std::filesystem::path& root, int partition_id,
                         std::int64_t night_id, StoreOptions options = {});

  NightStore(NightStore&&) noexcept = default;
  NightStore& operator=(NightStore&&) noexcept = default;
  ~NightStore() = default;

  static std::filesystem::path partition_dir(const std::filesystem::path& root,
                                             int partition_id);

  int partition_id() const noexcept { return partition_id_; }
  std::int64_t night_id() const noexcept { return night_id_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

  /// DeltaInsert: appends one frame and its matches as a new segment.
  /// Throws SequencingError for a non-increasing epoch or a merged night,
  /// StorageError (after rollback) when the write fails.
  AppendAck delta_insert(const FrameBatch& frame, const MatchResult& matches);

  /// Folds this night's delta log into the base run. All-or-nothing; a
  /// failure before commit leaves base and delta untouched, and re-running
  /// converges to the same base bytes.
  MergeReport nightly_merge(const MergeHook& hook = {});

  StoreSnapshot snapshot() const;
  StorageStats stats() const;

  /// Snapshot of a partition without opening it for writing: no recovery or
  /// cleanup runs, so it is safe next to a live writer. Throws StorageError
  /// if the partition directory does not exist.
  static StoreSnapshot read_snapshot(const std::filesystem::path& root,
                                     int partition_id);

  double last_epoch() const noexcept { return last_epoch_; }
  bool night_merged() const noexcept;
  std::size_t delta_segments() const;

 private:
  NightStore() = default;
  void recover();
  void read_current();
  void write_current() const;
  std::filesystem::path night_dir(std::int64_t night) const;

  std::filesystem::path dir_;
  int partition_id_{0};
  std::int64_t night_id_{0};
  StoreOptions options_{};

  // Committed state (mirrors CURRENT).
  std::uint64_t base_gen_{0};
  std::vector<std::int64_t> merged_nights_;
  double base_last_epoch_{-1.0};
  std::uint64_t base_records_{0};

  double last_epoch_{-1.0};
  std::uint64_t next_seq_{0};
  StorageStats stats_{};
};

/// Builds the stored form of a frame from its match result.
std::vector<StoredRecord> to_stored(const FrameBatch& frame,
                                    const MatchResult& matches);

std::vector<BaseIndexEntry> read_base_index(const std::filesystem::path& path);

/// Sum of regular file sizes below `dir`.
std::uint64_t directory_bytes(const std::filesystem::path& dir);

}  // namespace tdcat
