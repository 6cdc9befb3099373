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
#include "tdcat/mining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "tdcat/error.hpp"
#include "tdcat/text.hpp"

namespace tdcat {

void MiningConfig::validate() const {
  if (window == 0) throw ConfigError("window must be > 0");
  if (min_points == 0 || min_points > window) {
    throw ConfigError("min_points must lie in [1, window]");
  }
  if (!(k > 0.0)) throw ConfigError("k must be > 0");
  if (persistence_n < 1) throw ConfigError("persistence_n must be >= 1");
  if (!(match_radius_deg > 0.0 && match_radius_deg <= 90.0)) {
    throw ConfigError("match_radius_deg must lie in (0, 90]");
  }
  if (!(cadence_s > 0.0)) throw ConfigError("cadence_s must be > 0");
}

std::string_view to_string(AlertKind k) {
  switch (k) {
    case AlertKind::kNewSource: return "new_source";
    case AlertKind::kBrightening: return "brightening";
    case AlertKind::kDimming: return "dimming";
  }
  return "new_source";
}

// --- WindowState ------------------------------------------------------------

WindowState::WindowState(StarId star_id, std::size_t capacity)
    : star_id_(star_id), epochs_(capacity), mags_(capacity) {
  if (capacity == 0) throw ConfigError("window capacity must be > 0");
}

double WindowState::mean() const noexcept {
  if (count_ == 0) return 0.0;
  return shift_ + sum_ / static_cast<double>(count_);
}

double WindowState::variance() const noexcept {
  if (count_ < 2) return 0.0;
  const double n = static_cast<double>(count_);
  const double v = (sumsq_ - sum_ * sum_ / n) / (n - 1.0);
  return v > 0.0 ? v : 0.0;
}

void WindowState::push(double epoch, double mag) {
  const std::size_t cap = epochs_.size();
  if (count_ == 0) shift_ = mag;
  if (count_ == cap) {
    const double old = mags_[head_] - shift_;
    sum_ -= old;
    sumsq_ -= old * old;
    epochs_[head_] = epoch;
    mags_[head_] = mag;
    head_ = (head_ + 1) % cap;
  } else {
    const std::size_t slot = (head_ + count_) % cap;
    epochs_[slot] = epoch;
    mags_[slot] = mag;
    ++count_;
  }
  const double d = mag - shift_;
  sum_ += d;
  sumsq_ += d * d;
  last_epoch_ = epoch;
  if (++pushes_since_rebuild_ >= cap) rebuild();
}

void WindowState::rebuild() {
  pushes_since_rebuild_ = 0;
  if (count_ == 0) return;
  shift_ = mags_[head_];
  sum_ = 0.0;
  sumsq_ = 0.0;
  for (std::size_t i = 0; i < count_; ++i) {
    const double d = mags_[(head_ + i) % epochs_.size()] - shift_;
    sum_ += d;
    sumsq_ += d * d;
  }
}

std::vector<double> WindowState::magnitudes() const {
  std::vector<double> out(count_);
  for (std::size_t i = 0; i < count_; ++i) {
    out[i] = mags_[(head_ + i) % epochs_.size()];
  }
  return out;
}

std::optional<Alert> online_update(WindowState& state, double epoch,
                                   double mag, double mag_error,
                                   const MiningConfig& config,
                                   SkyPosition position) {
  if (!state.empty() && !(epoch > state.last_epoch())) {
    throw SequencingError("window update for star " +
                          std::to_string(state.star_id()) +
                          " does not advance in epoch");
  }
  std::optional<Alert> alert;
  if (state.size() >= config.min_points) {
    const double dev = mag - state.mean();
    const double sigma = std::sqrt(state.variance() + mag_error * mag_error);
    const double score = sigma > 0.0 ? std::abs(dev) / sigma
                         : dev != 0.0 ? std::numeric_limits<double>::infinity()
                                      : 0.0;
    if (score > config.k) {
      alert = Alert{dev < 0.0 ? AlertKind::kBrightening : AlertKind::kDimming,
                    state.star_id(), position, epoch, score};
    }
  }
  state.push(epoch, mag);
  return alert;
}

// --- NewSourceDetector ------------------------------------------------------

NewSourceDetector::NewSourceDetector(MiningConfig config)
    : config_(std::move(config)) {
  config_.validate();
}

std::vector<Alert> NewSourceDetector::observe(
    double epoch, std::span<const SourceRecord> candidates) {
  const auto frame =
      static_cast<std::int64_t>(std::llround(epoch / config_.cadence_s));
  // Only tracks seen in the immediately preceding frame can continue.
  std::erase_if(tracks_, [&](const Track& t) { return t.last_frame != frame - 1; });
  const std::size_t previous = tracks_.size();

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].id < candidates[b].id;
  });

  std::vector<Alert> alerts;
  for (std::size_t idx : order) {
    const SourceRecord& c = candidates[idx];
    const Vec3 cu = c.unit();
    std::size_t best = previous;
    double best_sep = 0.0;
    for (std::size_t t = 0; t < previous; ++t) {
      if (tracks_[t].last_frame == frame) continue;  // already claimed
      const double sep = angular_separation(
          cu, radec_to_cartesian(tracks_[t].position.ra, tracks_[t].position.dec));
      if (sep <= config_.match_radius_deg && (best == previous || sep < best_sep)) {
        best = t;
        best_sep = sep;
      }
    }
    Track* track = nullptr;
    if (best < previous) {
      track = &tracks_[best];
      ++track->count;
    } else {
      tracks_.push_back({{c.ra, c.dec}, frame, 1, false});
      track = &tracks_.back();
    }
    track->position = {c.ra, c.dec};
    track->last_frame = frame;
    if (!track->alerted && track->count >= config_.persistence_n) {
      track->alerted = true;
      alerts.push_back({AlertKind::kNewSource, kNoStar, track->position, epoch,
                        std::numeric_limits<double>::infinity()});
    }
  }
  std::erase_if(tracks_, [&](const Track& t) { return t.last_frame != frame; });
  return alerts;
}

// --- OnlineMiner ------------------------------------------------------------

OnlineMiner::OnlineMiner(MiningConfig config)
    : config_(config), new_sources_(config) {
  config_.validate();
}

std::vector<Alert> OnlineMiner::process_frame(
    double epoch, std::span<const SourceRecord> records,
    std::span<const Assignment> assignments) {
  if (records.size() != assignments.size()) {
    throw DomainError("assignments", "do not correspond to records");
  }
  std::vector<Alert> alerts;
  std::vector<SourceRecord> candidates;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SourceRecord& r = records[i];
    if (!assignments[i].matched()) {
      candidates.push_back(r);
      continue;
    }
    const StarId id = assignments[i].star_id;
    auto it = windows_.find(id);
    if (it == windows_.end()) {
      it = windows_.emplace(id, WindowState(id, config_.window)).first;
    }
    if (auto a = online_update(it->second, epoch, r.calmag, r.mag_error,
                               config_, r.position())) {
      alerts.push_back(*a);
    }
  }
  auto fresh = new_sources_.observe(epoch, candidates);
  alerts.insert(alerts.end(), fresh.begin(), fresh.end());
  std::sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.star_id != b.star_id) return a.star_id < b.star_id;
    if (a.position.ra != b.position.ra) return a.position.ra < b.position.ra;
    return a.position.dec < b.position.dec;
  });
  return alerts;
}

const WindowState* OnlineMiner::window(StarId star_id) const {
  const auto it = windows_.find(star_id);
  return it == windows_.end() ? nullptr : &it->second;
}

std::vector<Alert> replay_online(std::span<const StoredRecord> records,
                                 const MiningConfig& config) {
  std::vector<const StoredRecord*> order;
  order.reserve(records.size());
  for (const auto& r : records) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [](const StoredRecord* a, const StoredRecord* b) {
              if (a->epoch != b->epoch) return a->epoch < b->epoch;
              return a->source.id < b->source.id;
            });
  OnlineMiner miner(config);
  std::vector<Alert> alerts;
  std::vector<SourceRecord> frame;
  std::vector<Assignment> assign;
  std::size_t i = 0;
  while (i < order.size()) {
    const double epoch = order[i]->epoch;
    frame.clear();
    assign.clear();
    for (; i < order.size() && order[i]->epoch == epoch; ++i) {
      frame.push_back(order[i]->source);
      assign.push_back({order[i]->star_id, order[i]->separation_deg});
    }
    auto a = miner.process_frame(epoch, frame, assign);
    alerts.insert(alerts.end(), a.begin(), a.end());
  }
  return alerts;
}

void write_alerts_csv(std::ostream& out, std::span<const Alert> alerts) {
  out << "kind,star_id,ra,dec,epoch,score\n";
  std::string line;
  for (const auto& a : alerts) {
    line.clear();
    line += to_string(a.kind);
    line += ',';
    text::append(line, a.star_id);
    for (double v : {a.position.ra, a.position.dec, a.epoch}) {
      line += ',';
      text::append(line, v);
    }
    line += ',';
    if (std::isinf(a.score)) {
      line += "inf";
    } else {
      text::append(line, a.score);
    }
    line += '\n';
    out << line;
  }
}

}  // namespace tdcat
