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
#include "tdcat/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tdcat/error.hpp"
#include "tdcat/text.hpp"

namespace tdcat {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int team_size(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::ofstream open_report(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageError("cannot write " + path.string());
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  engine.validate();
  mining.validate();
  if (stars_per_partition <= 0) {
    throw ConfigError("stars_per_partition must be > 0");
  }
  if (frames <= 0) throw ConfigError("frames must be > 0");
  if (night_id < 0) throw ConfigError("night must be >= 0");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (join_threads < 0) throw ConfigError("join_threads must be >= 0");
  if (!(astrometric_sigma_deg >= 0.0)) {
    throw ConfigError("astrometric sigma must be >= 0");
  }
  if (!(photometric_sigma_mag >= 0.0)) {
    throw ConfigError("photometric sigma must be >= 0");
  }
  if (root.empty() && (persist || write_reports)) {
    throw ConfigError("a data directory is required");
  }
}

SkyModel partition_model(const PipelineConfig& config, int camera_id) {
  SkyModel m;
  m.seed = config.seed;
  m.star_count = config.stars_per_partition;
  m.footprint = camera_footprint(camera_id);
  m.astrometric_sigma_deg = config.astrometric_sigma_deg;
  m.photometric_sigma_mag = config.photometric_sigma_mag;
  m.min_separation_deg = unambiguous_separation(config.astrometric_sigma_deg);
  m.star_id_offset = static_cast<StarId>(camera_id) << 32;
  m.camera_id = camera_id;
  return m;
}

double frame_epoch(std::int64_t night, std::int64_t frame, double cadence_s) {
  const auto stride = static_cast<std::int64_t>(std::ceil(86400.0 / cadence_s));
  return static_cast<double>(night * stride + frame) * cadence_s;
}

double CadenceReport::throughput() const noexcept {
  double busy = 0.0;
  for (const auto& f : frames) busy += f.total_s;
  return busy > 0.0 ? static_cast<double>(records_ingested) / busy : 0.0;
}

fs::path report_dir(const fs::path& root, int partition, std::int64_t night) {
  char part[32];
  char nightbuf[32];
  std::snprintf(part, sizeof part, "partition-%02d", partition);
  std::snprintf(nightbuf, sizeof nightbuf, "night-%06lld",
                static_cast<long long>(night));
  return root / "out" / part / nightbuf;
}

// --- PartitionWorker ----------------------------------------------------------

struct PartitionWorker::Outputs {
  std::ofstream matches;
  std::ofstream candidates;
  std::ofstream alerts;
  fs::path cadence_path;
};

PartitionWorker::PartitionWorker(int camera_id, const PipelineConfig& config)
    : camera_id_(camera_id),
      config_(config),
      model_(partition_model(config, camera_id)),
      miner_([&] {
        MiningConfig m = config.mining;
        m.match_radius_deg = config.engine.match_radius_deg;
        m.cadence_s = config.engine.cadence_s;
        return m;
      }()) {
  config_.validate();
  templ_ = build_template(model_, config_.engine);
  report_.partition = camera_id;
  if (config_.persist) {
    store_.emplace(NightStore::open(config_.root, camera_id, config_.night_id,
                                    config_.store));
  }
  if (config_.write_reports) {
    out_ = std::make_unique<Outputs>();
    const fs::path dir = report_dir(config_.root, camera_id, config_.night_id);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw StorageError("create " + dir.string() + ": " + ec.message());
    out_->matches = open_report(dir / "matches.csv");
    out_->candidates = open_report(dir / "candidates.csv");
    out_->alerts = open_report(dir / "alerts.csv");
    out_->cadence_path = dir / "cadence.csv";
    write_matches_csv(out_->matches, {}, true);
    write_candidates_csv(out_->candidates, {}, true);
    write_alerts_csv(out_->alerts, {});
  }
}

PartitionWorker::~PartitionWorker() = default;
PartitionWorker::PartitionWorker(PartitionWorker&&) noexcept = default;
PartitionWorker& PartitionWorker::operator=(PartitionWorker&&) noexcept =
    default;

void PartitionWorker::set_injections(
    std::span<const TransientInjection> injections) {
  injections_.clear();
  for (const auto& inj : injections) {
    const bool mine =
        inj.kind == InjectionKind::kBrightening
            ? templ_.find(inj.target_star) >= 0
            : model_.footprint.contains(inj.position.ra, inj.position.dec);
    if (mine) injections_.push_back(inj);
  }
}

FrameBatch PartitionWorker::generate(std::int64_t frame) const {
  const double epoch =
      frame_epoch(config_.night_id, frame, config_.engine.cadence_s);
  return observe_frame(templ_, epoch, injections_, model_, config_.engine);
}

FrameTiming PartitionWorker::process(std::int64_t frame) {
  const auto t0 = Clock::now();
  const FrameBatch batch = generate(frame);
  const double generate_s = seconds_since(t0);
  report_.records_generated += batch.records.size();
  FrameTiming t = run_chain(batch);
  t.frame = frame;
  t.generate_s = generate_s;
  t.total_s = seconds_since(t0);
  record(t);
  return t;
}

FrameTiming PartitionWorker::ingest(const FrameBatch& frame) {
  report_.records_generated += frame.records.size();
  FrameTiming t = run_chain(frame);
  record(t);
  return t;
}

void PartitionWorker::record(const FrameTiming& t) {
  report_.frames.push_back(t);
  if (t.total_s > config_.engine.cadence_s) ++report_.budget_violations;
}

FrameTiming PartitionWorker::run_chain(const FrameBatch& frame) {
  FrameTiming t;
  t.epoch = frame.epoch;
  t.frame = static_cast<std::int64_t>(frame.imageid & 0xffffffu);
  t.records = frame.records.size();
  const auto t0 = Clock::now();

  auto ts = Clock::now();
  const MatchResult matches =
      range_join(frame, templ_.index, config_.engine.match_radius_deg,
                 {config_.join_threads});
  t.match_s = seconds_since(ts);
  t.matched = matches.matched.size();
  t.unmatched = matches.unmatched.size();

  ts = Clock::now();
  if (store_) store_->delta_insert(frame, matches);
  t.insert_s = seconds_since(ts);

  ts = Clock::now();
  if (config_.retain_curves) curves_.append_points(frame, matches);
  t.curve_s = seconds_since(ts);

  ts = Clock::now();
  auto alerts =
      miner_.process_frame(frame.epoch, frame.records, matches.per_record);
  t.mine_s = seconds_since(ts);
  t.alerts = alerts.size();
  t.total_s = seconds_since(t0);

  if (out_) {
    write_matches_csv(out_->matches, matches, false);
    write_candidates_csv(out_->candidates, matches, false);
    std::ostringstream body;
    write_alerts_csv(body, alerts);
    const std::string s = body.str();
    out_->alerts << s.substr(s.find('\n') + 1);
  }

  report_.records_ingested += t.records;
  report_.matched += t.matched;
  report_.unmatched += t.unmatched;
  report_.alerts.insert(report_.alerts.end(), alerts.begin(), alerts.end());
  return t;
}

void PartitionWorker::finish() {
  if (store_ && config_.merge_at_end) store_->nightly_merge();
  if (out_) {
    for (auto* f : {&out_->matches, &out_->candidates, &out_->alerts}) {
      f->flush();
      if (!*f) throw StorageError("report write failed");
    }
    std::ofstream cadence = open_report(out_->cadence_path);
    write_cadence_csv(cadence, report_);
    if (!cadence) throw StorageError("report write failed");
  }
}

void write_cadence_csv(std::ostream& out, const CadenceReport& report) {
  out << "frame,epoch,records,matched,unmatched,alerts,generate_s,match_s,"
         "insert_s,curve_s,mine_s,total_s\n";
  std::string line;
  for (const auto& f : report.frames) {
    line.clear();
    text::append(line, f.frame);
    line += ',';
    text::append(line, f.epoch);
    for (std::size_t v : {f.records, f.matched, f.unmatched, f.alerts}) {
      line += ',';
      text::append(line, static_cast<std::uint64_t>(v));
    }
    for (double v :
         {f.generate_s, f.match_s, f.insert_s, f.curve_s, f.mine_s, f.total_s}) {
      line += ',';
      text::append(line, v);
    }
    line += '\n';
    out << line;
  }
}

std::vector<CadenceReport> run_night(
    const PipelineConfig& config, std::span<const int> partitions,
    std::span<const TransientInjection> injections) {
  config.validate();
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    if (partitions[i] < 0) throw ConfigError("partition ids must be >= 0");
    for (std::size_t j = 0; j < i; ++j) {
      if (partitions[i] == partitions[j]) {
        throw ConfigError("partition " + std::to_string(partitions[i]) +
                          " listed twice");
      }
    }
  }
  for (const auto& inj : injections) inj.validate();

  std::vector<CadenceReport> reports(partitions.size());
  const auto n = static_cast<std::ptrdiff_t>(partitions.size());
  const int team = team_size(config.workers);
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const auto idx = static_cast<std::size_t>(p);
    const int camera = partitions[idx];
    const auto t0 = Clock::now();
    CadenceReport& report = reports[idx];
    report.partition = camera;
    std::optional<PartitionWorker> worker;
    try {
      worker.emplace(camera, config);
      worker->set_injections(injections);
      for (std::int64_t f = 0; f < config.frames; ++f) worker->process(f);
      worker->finish();
      report = worker->report();
    } catch (const std::exception& e) {
      if (worker) report = worker->report();
      report.ok = false;
      report.error = e.what();
    }
    report.wall_s = seconds_since(t0);
  }
  return reports;
}

// --- injections ---------------------------------------------------------------

std::vector<TransientInjection> plan_injections(const PipelineConfig& config,
                                                const TemplateCatalog& templ,
                                                int camera_id,
                                                std::uint64_t seed,
                                                const InjectionPlan& plan) {
  if (plan.count == 0) return {};
  if (templ.stars.empty()) throw ConfigError("template is empty");
  if (!(plan.min_abs_delta_mag > 0.0 &&
        plan.max_abs_delta_mag >= plan.min_abs_delta_mag)) {
    throw ConfigError("injection delta range is invalid");
  }
  if (plan.min_frames < 1 || plan.max_frames < plan.min_frames) {
    throw ConfigError("injection duration range is invalid");
  }
  const auto warmup = static_cast<std::int64_t>(config.mining.min_points);
  const std::int64_t last_start = config.frames - plan.min_frames;
  if (last_start < warmup) {
    throw ConfigError("night too short for injections after warm-up");
  }
  std::mt19937_64 rng(mix(mix(seed, static_cast<std::uint64_t>(camera_id)),
                          static_cast<std::uint64_t>(config.night_id)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Footprint fp = camera_footprint(camera_id);
  const double r = config.engine.match_radius_deg;
  const double cadence = config.engine.cadence_s;

  std::vector<TransientInjection> out;
  std::vector<StarId> used;
  while (out.size() < plan.count) {
    TransientInjection inj;
    std::uniform_int_distribution<std::int64_t> start(warmup, last_start);
    const std::int64_t on = start(rng);
    std::uniform_int_distribution<std::int64_t> dur(
        plan.min_frames, std::min(plan.max_frames, config.frames - on));
    const std::int64_t off = on + dur(rng);
    inj.epoch_on = frame_epoch(config.night_id, on, cadence);
    inj.epoch_off = frame_epoch(config.night_id, off, cadence);
    const double amp =
        plan.min_abs_delta_mag +
        unit(rng) * (plan.max_abs_delta_mag - plan.min_abs_delta_mag);
    if (unit(rng) < plan.new_source_fraction) {
      inj.kind = InjectionKind::kNewSource;
      inj.delta_mag = 0.0;
      inj.mag = 12.0 + 2.0 * unit(rng);
      const double z0 = std::sin(fp.dec_min * kDegToRad);
      const double z1 = std::sin(fp.dec_max * kDegToRad);
      inj.position.ra = fp.ra_min + unit(rng) * (fp.ra_max - fp.ra_min);
      inj.position.dec = std::asin(z0 + unit(rng) * (z1 - z0)) * kRadToDeg;
      if (!fp.contains(inj.position.ra, inj.position.dec)) continue;
      SourceRecord probe;
      probe.ra = inj.position.ra;
      probe.dec = inj.position.dec;
      const auto near = range_join_serial({&probe, 1}, templ.index, 3.0 * r);
      if (!near.unmatched.size()) continue;
      bool clear = true;
      for (const auto& o : out) {
        if (o.kind == InjectionKind::kNewSource &&
            angular_separation(o.position, inj.position) < 6.0 * r) {
          clear = false;
        }
      }
      if (!clear) continue;
    } else {
      inj.kind = InjectionKind::kBrightening;
      std::uniform_int_distribution<std::size_t> pick(0, templ.stars.size() - 1);
      const TemplateStar& s = templ.stars[pick(rng)];
      if (std::find(used.begin(), used.end(), s.star_id) != used.end()) continue;
      used.push_back(s.star_id);
      inj.target_star = s.star_id;
      inj.position = {s.ra, s.dec};
      inj.delta_mag = unit(rng) < 0.5 ? -amp : amp;
    }
    out.push_back(inj);
  }
  return out;
}

std::vector<bool> recovered_injections(
    std::span<const TransientInjection> injections,
    std::span<const Alert> alerts, double match_radius_deg) {
  std::vector<bool> found(injections.size(), false);
  for (std::size_t i = 0; i < injections.size(); ++i) {
    const auto& inj = injections[i];
    for (const auto& a : alerts) {
      if (!inj.active_at(a.epoch)) continue;
      if (inj.kind == InjectionKind::kBrightening) {
        if (a.kind != AlertKind::kNewSource && a.star_id == inj.target_star) {
          found[i] = true;
        }
      } else if (a.kind == AlertKind::kNewSource &&
                 angular_separation(a.position, inj.position) <=
                     match_radius_deg) {
        found[i] = true;
      }
      if (found[i]) break;
    }
  }
  return found;
}

// --- scatter-gather -------------------------------------------------------------

RecordPredicate cone_predicate(SkyPosition center, double radius_deg) {
  if (!(radius_deg >= 0.0 && radius_deg <= 180.0)) {
    throw DomainError("radius", "must lie in [0, 180]");
  }
  const Vec3 c = radec_to_cartesian(center.ra, center.dec);
  return [c, radius_deg](const StoredRecord& r) {
    return angular_separation(c, r.source.unit()) <= radius_deg;
  };
}

std::vector<StoredRecord> scatter_gather_query(
    const fs::path& root, std::span<const int> partitions,
    const RecordPredicate& predicate, int threads) {
  if (!predicate) throw ConfigError("query predicate is empty");
  std::vector<std::vector<StoredRecord>> parts(partitions.size());
  std::vector<std::string> errors(partitions.size());
  const auto n = static_cast<std::ptrdiff_t>(partitions.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(team_size(threads))
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const auto idx = static_cast<std::size_t>(p);
    try {
      const StoreSnapshot snap = NightStore::read_snapshot(root, partitions[idx]);
      for (auto& r : snap.read_all()) {
        if (predicate(r)) parts[idx].push_back(std::move(r));
      }
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw PartialResultError(partitions[i], errors[i]);
  }
  std::vector<StoredRecord> out;
  for (auto& part : parts) {
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  std::sort(out.begin(), out.end(),
            [](const StoredRecord& a, const StoredRecord& b) {
              if (a.epoch != b.epoch) return a.epoch < b.epoch;
              return a.source.id < b.source.id;
            });
  return out;
}

// --- scaling ----------------------------------------------------------------------

std::vector<ScalingRow> scaling_benchmark(const PipelineConfig& config,
                                          std::span<const int> worker_counts,
                                          int partitions) {
  if (partitions <= 0) throw ConfigError("partitions must be > 0");
  std::vector<int> ids(static_cast<std::size_t>(partitions));
  for (int i = 0; i < partitions; ++i) ids[static_cast<std::size_t>(i)] = i;
  std::vector<ScalingRow> rows;
  for (int w : worker_counts) {
    if (w <= 0) throw ConfigError("worker counts must be > 0");
    PipelineConfig c = config;
    c.workers = w;
    c.night_id = config.night_id;
    if (c.persist || c.write_reports) {
      c.root = config.root / ("scaling-w" + std::to_string(w));
      std::error_code ec;
      fs::remove_all(c.root, ec);
    }
    const auto t0 = Clock::now();
    const auto reports = run_night(c, ids, {});
    ScalingRow row;
    row.workers = w;
    row.wall_s = seconds_since(t0);
    std::uint64_t records = 0;
    for (const auto& r : reports) {
      if (!r.ok) throw StorageError("scaling run failed: " + r.error);
      records += r.records_ingested;
    }
    row.records_per_s = row.wall_s > 0.0 ? records / row.wall_s : 0.0;
    rows.push_back(row);
  }
  if (!rows.empty()) {
    const double base = rows.front().records_per_s / rows.front().workers;
    for (auto& r : rows) {
      r.efficiency = base > 0.0 ? r.records_per_s / (r.workers * base) : 0.0;
    }
  }
  return rows;
}

void write_scaling_csv(std::ostream& out, std::span<const ScalingRow> rows) {
  out << "workers,wall_s,records_per_s,efficiency\n";
  std::string line;
  for (const auto& r : rows) {
    line.clear();
    text::append(line, r.workers);
    for (double v : {r.wall_s, r.records_per_s, r.efficiency}) {
      line += ',';
      text::append(line, v);
    }
    line += '\n';
    out << line;
  }
}

}  // namespace tdcat
