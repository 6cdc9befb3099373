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

// Online mining: per-star sliding windows for brightness excursions and a
// persistence filter over unmatched detections for new sources.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tdcat/catalog.hpp"
#include "tdcat/crossmatch.hpp"
#include "tdcat/delta_store.hpp"

namespace tdcat {

struct MiningConfig {
  std::size_t window{40};      // W: 10 minutes at a 15 s cadence
  std::size_t min_points{10};  // W_min: warm-up before any alert
  double k{5.0};               // threshold in sigma units
  int persistence_n{2};        // consecutive frames for a new source
  double match_radius_deg{0.003};
  double cadence_s{15.0};

  void validate() const;
};

enum class AlertKind { kNewSource, kBrightening, kDimming };

std::string_view to_string(AlertKind k);

struct Alert {
  AlertKind kind{AlertKind::kNewSource};
  StarId star_id{kNoStar};
  SkyPosition position{};
  double epoch{0.0};
  double score{0.0};

  friend bool operator==(const Alert&, const Alert&) = default;
};

/// Last W (epoch, mag) points of one star with running mean and sample
/// variance. Sums are kept relative to a shift value to limit cancellation
/// and are rebuilt exactly once per ring cycle.
class WindowState {
 public:
  explicit WindowState(StarId star_id = kNoStar, std::size_t capacity = 40);

  StarId star_id() const noexcept { return star_id_; }
  std::size_t size() const noexcept { return count_; }
  std::size_t capacity() const noexcept { return epochs_.size(); }
  bool empty() const noexcept { return count_ == 0; }
  double last_epoch() const noexcept { return last_epoch_; }

  double mean() const noexcept;
  /// Sample variance (n - 1); zero below two points.
  double variance() const noexcept;

  void push(double epoch, double mag);

  /// Oldest-first copy of the window magnitudes.
  std::vector<double> magnitudes() const;

 private:
  void rebuild();

  StarId star_id_;
  std::vector<double> epochs_;
  std::vector<double> mags_;
  std::size_t head_{0};  // slot of the oldest point
  std::size_t count_{0};
  std::size_t pushes_since_rebuild_{0};
  double last_epoch_{-1.0};
  double shift_{0.0};
  double sum_{0.0};
  double sumsq_{0.0};
};

/// Scores the point against the window, then adds it. Alerts iff the window
/// already holds >= min_points and
/// |mag - mean| > k * sqrt(variance + mag_error^2).
/// Throws SequencingError if epoch does not advance.
std::optional<Alert> online_update(WindowState& state, double epoch,
                                   double mag, double mag_error,
                                   const MiningConfig& config,
                                   SkyPosition position = {});

/// Tracks unmatched detections across consecutive frames and alerts once per
/// track when it has been seen persistence_n frames in a row.
class NewSourceDetector {
 public:
  explicit NewSourceDetector(MiningConfig config);

  std::vector<Alert> observe(double epoch,
                             std::span<const SourceRecord> candidates);

  std::size_t active_tracks() const noexcept { return tracks_.size(); }

 private:
  struct Track {
    SkyPosition position;
    std::int64_t last_frame{0};
    int count{0};
    bool alerted{false};
  };

  MiningConfig config_;
  std::vector<Track> tracks_;
};

/// Runs both detectors over frames in epoch order.
class OnlineMiner {
 public:
  explicit OnlineMiner(MiningConfig config);

  /// `assignments` is aligned with `records`; unmatched records feed the
  /// new-source detector, matched ones their star's window.
  std::vector<Alert> process_frame(double epoch,
                                   std::span<const SourceRecord> records,
                                   std::span<const Assignment> assignments);

  const WindowState* window(StarId star_id) const;
  const MiningConfig& config() const noexcept { return config_; }

 private:
  MiningConfig config_;
  std::unordered_map<StarId, WindowState> windows_;
  NewSourceDetector new_sources_;
};

/// Replays stored records (any order) frame by frame through an OnlineMiner.
std::vector<Alert> replay_online(std::span<const StoredRecord> records,
                                 const MiningConfig& config);

void write_alerts_csv(std::ostream& out, std::span<const Alert> alerts);

}  // namespace tdcat
