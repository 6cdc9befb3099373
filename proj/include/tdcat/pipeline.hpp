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

// Shared-nothing pipeline simulation: one worker per camera partition runs
// generate -> cross-match -> delta insert -> light curve -> online mining on
// a logical frame clock, plus scatter-gather queries over the partitions.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdcat/catalog.hpp"
#include "tdcat/crossmatch.hpp"
#include "tdcat/delta_store.hpp"
#include "tdcat/lightcurve.hpp"
#include "tdcat/mining.hpp"
#include "tdcat/skygen.hpp"

namespace tdcat {

struct PipelineConfig {
  EngineConfig engine{};
  MiningConfig mining{};
  std::filesystem::path root{"tdcat-data"};
  std::uint64_t seed{1};
  std::int64_t stars_per_partition{1756};
  std::int64_t frames{1920};
  std::int64_t night_id{0};
  double astrometric_sigma_deg{1.0 / 3600.0};
  double photometric_sigma_mag{0.02};
  /// Partitions processed concurrently; 0 uses the OpenMP default.
  int workers{0};
  /// OpenMP team inside each partition's cross-match.
  int join_threads{1};
  /// Write frames to the partition stores.
  bool persist{true};
  StoreOptions store{.sync = false};
  /// Write match, candidate, alert and cadence CSV files under root/out.
  bool write_reports{true};
  /// Keep in-memory light curves for the night.
  bool retain_curves{true};
  /// Run nightly_merge after the last frame.
  bool merge_at_end{false};

  void validate() const;
};

/// Sky model of one camera partition. Star ids are offset by camera << 32
/// so they are unique across partitions.
SkyModel partition_model(const PipelineConfig& config, int camera_id);

/// Logical clock: frame `frame` of night `night` observes at
/// (night * ceil(86400 / cadence) + frame) * cadence seconds.
double frame_epoch(std::int64_t night, std::int64_t frame, double cadence_s);

struct FrameTiming {
  std::int64_t frame{0};
  double epoch{0.0};
  double generate_s{0.0};
  double match_s{0.0};
  double insert_s{0.0};
  double curve_s{0.0};
  double mine_s{0.0};
  double total_s{0.0};
  std::size_t records{0};
  std::size_t matched{0};
  std::size_t unmatched{0};
  std::size_t alerts{0};

  double stage_sum() const noexcept {
    return generate_s + match_s + insert_s + curve_s + mine_s;
  }
};

struct CadenceReport {
  int partition{0};
  bool ok{true};
  std::string error;  // diagnostic when the night was aborted
  std::vector<FrameTiming> frames;
  std::size_t budget_violations{0};  // frames with total_s > cadence
  std::uint64_t records_generated{0};
  std::uint64_t records_ingested{0};
  std::uint64_t matched{0};
  std::uint64_t unmatched{0};
  std::vector<Alert> alerts;
  double wall_s{0.0};

  /// Ingested records per second of summed frame time.
  double throughput() const noexcept;
};

/// Owns one camera's data end to end: template, store, curves and windows.
class PartitionWorker {
 public:
  PartitionWorker(int camera_id, const PipelineConfig& config);
  ~PartitionWorker();
  PartitionWorker(PartitionWorker&&) noexcept;
  PartitionWorker& operator=(PartitionWorker&&) noexcept;

  int camera_id() const noexcept { return camera_id_; }
  const SkyModel& model() const noexcept { return model_; }
  const TemplateCatalog& template_catalog() const noexcept { return templ_; }
  const CurveSet& curves() const noexcept { return curves_; }
  const OnlineMiner& miner() const noexcept { return miner_; }
  NightStore* store() noexcept { return store_ ? &*store_ : nullptr; }
  const CadenceReport& report() const noexcept { return report_; }

  /// Keeps the injections that concern this partition: brightenings of its
  /// own stars and new sources inside its footprint.
  void set_injections(std::span<const TransientInjection> injections);

  FrameBatch generate(std::int64_t frame) const;

  /// Full chain for one frame of the configured night.
  FrameTiming process(std::int64_t frame);

  /// Generate-free path: cross-match, insert, curve update and mining of a
  /// pre-generated frame.
  FrameTiming ingest(const FrameBatch& frame);

  /// Closes report files and merges the night if configured.
  void finish();

 private:
  struct Outputs;
  FrameTiming run_chain(const FrameBatch& frame);
  void record(const FrameTiming& t);

  int camera_id_;
  PipelineConfig config_;
  SkyModel model_;
  TemplateCatalog templ_;
  std::vector<TransientInjection> injections_;
  std::optional<NightStore> store_;
  CurveSet curves_;
  OnlineMiner miner_;
  std::unique_ptr<Outputs> out_;
  CadenceReport report_;
};

/// Runs one night on every listed partition. A failing partition records
/// its diagnostic in its report; the others are unaffected.
std::vector<CadenceReport> run_night(
    const PipelineConfig& config, std::span<const int> partitions,
    std::span<const TransientInjection> injections = {});

/// Directory receiving a partition's reports for a night.
std::filesystem::path report_dir(const std::filesystem::path& root,
                                 int partition, std::int64_t night);

void write_cadence_csv(std::ostream& out, const CadenceReport& report);

// --- injections -------------------------------------------------------------

struct InjectionPlan {
  std::size_t count{5};
  double min_abs_delta_mag{0.25};
  double max_abs_delta_mag{1.0};
  std::int64_t min_frames{2};
  std::int64_t max_frames{20};
  /// Fraction of injections that are new sources (rest brighten or dim).
  double new_source_fraction{0.4};
};

/// Random injections for one partition night. Each starts after the
/// detector warm-up, touches a distinct star, and new sources lie at least
/// three match radii from every template star.
std::vector<TransientInjection> plan_injections(const PipelineConfig& config,
                                                const TemplateCatalog& templ,
                                                int camera_id,
                                                std::uint64_t seed,
                                                const InjectionPlan& plan);

/// For each injection, whether some alert recovers it: a brightening or
/// dimming of the target star, or a new source within the match radius,
/// at an epoch inside the active interval.
std::vector<bool> recovered_injections(
    std::span<const TransientInjection> injections,
    std::span<const Alert> alerts, double match_radius_deg);

// --- scatter-gather ----------------------------------------------------------

using RecordPredicate = std::function<bool(const StoredRecord&)>;

RecordPredicate cone_predicate(SkyPosition center, double radius_deg);

/// Evaluates `predicate` over each partition's full history in parallel and
/// merges by (epoch, record id). Throws PartialResultError naming the first
/// unreadable partition.
std::vector<StoredRecord> scatter_gather_query(
    const std::filesystem::path& root, std::span<const int> partitions,
    const RecordPredicate& predicate, int threads = 0);

// --- scaling -----------------------------------------------------------------

struct ScalingRow {
  int workers{1};
  double wall_s{0.0};
  double records_per_s{0.0};
  double efficiency{1.0};  // throughput_w / (w * throughput_1)
};

/// Runs the same partitions x frames load at each worker count. The first
/// row is the reference for efficiency, so `worker_counts` should start
/// at 1.
std::vector<ScalingRow> scaling_benchmark(const PipelineConfig& config,
                                          std::span<const int> worker_counts,
                                          int partitions);

void write_scaling_csv(std::ostream& out, std::span<const ScalingRow> rows);

}  // namespace tdcat
