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
// tdcat command-line entry point.
//
// Exit status: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tdcat/capacity.hpp"
#include "tdcat/crossmatch.hpp"
#include "tdcat/delta_store.hpp"
#include "tdcat/error.hpp"
#include "tdcat/lightcurve.hpp"
#include "tdcat/mining.hpp"
#include "tdcat/periodogram.hpp"
#include "tdcat/pipeline.hpp"
#include "tdcat/record_io.hpp"
#include "tdcat/skygen.hpp"
#include "tdcat/text.hpp"

namespace fs = std::filesystem;
using namespace tdcat;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Globals {
  fs::path data_dir{"tdcat-data"};
  EngineConfig engine{};
  MiningConfig mining{};
  std::string density{"1/100"};
  std::uint64_t seed{1};
  double astrometric_sigma_arcsec{1.0};
  double photometric_sigma{0.02};
  bool sync{false};
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageError("cannot write " + path.string());
  return out;
}

/// Writes to `path`, or stdout when it is empty or "-".
template <typename F>
void emit(const std::string& path, F&& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  auto out = open_out(path);
  body(out);
  if (!out) throw StorageError("write failed: " + path);
}

PipelineConfig pipeline_config(const Globals& g) {
  PipelineConfig c;
  c.engine = g.engine;
  c.mining = g.mining;
  c.mining.match_radius_deg = g.engine.match_radius_deg;
  c.mining.cadence_s = g.engine.cadence_s;
  c.root = g.data_dir;
  c.seed = g.seed;
  c.stars_per_partition = sources_for(parse_density(g.density));
  c.astrometric_sigma_deg = g.astrometric_sigma_arcsec / 3600.0;
  c.photometric_sigma_mag = g.photometric_sigma;
  c.store.sync = g.sync;
  c.engine.sources_per_frame = c.stars_per_partition;
  return c;
}

std::vector<int> partition_list(int count, const std::vector<int>& explicit_ids) {
  if (!explicit_ids.empty()) return explicit_ids;
  if (count <= 0) throw ConfigError("--partitions must be > 0");
  std::vector<int> ids(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) ids[static_cast<std::size_t>(i)] = i;
  return ids;
}

std::vector<TransientInjection> load_truth(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read injection file " + path);
  return read_truth_log(in);
}

enum class FrameFormat { kCsv, kBin };

const char* extension(FrameFormat f) { return f == FrameFormat::kCsv ? ".csv" : ".tds"; }

fs::path frames_dir(const Globals& g, int camera, std::int64_t night) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "frames/partition-%02d/night-%06lld", camera,
                static_cast<long long>(night));
  return g.data_dir / buf;
}

std::string frame_file(std::int64_t frame, FrameFormat format) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame-%06lld%s", static_cast<long long>(frame),
                extension(format));
  return buf;
}

/// A single frame file, or every frame-NNNNNN file of the format in a directory.
std::vector<fs::path> list_frames(const fs::path& input, FrameFormat format) {
  if (fs::is_regular_file(input)) return {input};
  if (!fs::is_directory(input)) throw ConfigError("no such input " + input.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(input)) {
    const auto name = e.path().filename().string();
    if (name.rfind("frame-", 0) == 0 && e.path().extension() == extension(format)) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t frame_index_of(const fs::path& p) {
  const auto stem = p.stem().string();
  return text::parse<std::int64_t>(std::string_view(stem).substr(6), "frame file");
}

std::vector<SourceRecord> load_records(const fs::path& path, FrameFormat format) {
  if (format == FrameFormat::kCsv) return read_csv_file(path);
  std::vector<SourceRecord> out;
  for (const auto& r : read_segment_file(path)) out.push_back(r.source);
  return out;
}

void write_frame(const fs::path& path, FrameFormat format, const FrameBatch& frame) {
  if (format == FrameFormat::kCsv) {
    write_csv_file(path, frame.records);
    return;
  }
  std::vector<StoredRecord> rows(frame.records.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].source = frame.records[i];
    rows[i].epoch = frame.epoch;
  }
  write_segment_file(path, rows, false);
}

TemplateCatalog load_template(const fs::path& path, double zone_height) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read template " + path.string());
  return make_template(read_template_csv(in), zone_height);
}

void write_stored_csv(std::ostream& out, std::span<const StoredRecord> rows) {
  out << "epoch,star_id,separation," << csv_header() << '\n';
  std::string line;
  for (const auto& r : rows) {
    line.clear();
    text::append(line, r.epoch);
    line += ',';
    text::append(line, r.star_id);
    line += ',';
    text::append(line, r.separation_deg);
    line += ',';
    append_csv_row(line, r.source);
    line += '\n';
    out << line;
  }
}

void print_reports(const std::vector<CadenceReport>& reports, double cadence) {
  std::printf("partition,ok,frames,records,matched,unmatched,alerts,"
              "budget_violations,max_frame_s,records_per_s,error\n");
  for (const auto& r : reports) {
    double worst = 0.0;
    for (const auto& f : r.frames) worst = std::max(worst, f.total_s);
    std::printf("%d,%d,%zu,%llu,%llu,%llu,%zu,%zu,%.4f,%.4g,%s\n", r.partition,
                r.ok ? 1 : 0, r.frames.size(),
                static_cast<unsigned long long>(r.records_ingested),
                static_cast<unsigned long long>(r.matched),
                static_cast<unsigned long long>(r.unmatched), r.alerts.size(),
                r.budget_violations, worst, r.throughput(), r.error.c_str());
  }
  (void)cadence;
}

std::vector<int> parse_int_list(const std::string& text_value, const char* what) {
  std::vector<int> out;
  for (auto f : text::split(text_value)) {
    out.push_back(text::parse<int>(text::trim(f), what));
  }
  if (out.empty()) throw ConfigError(std::string(what) + " must not be empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tdcat: time-domain star catalog engine", "tdcat"};
  app.set_version_flag("--version", std::string("tdcat ") + TDCAT_VERSION);
  app.set_config("--config", "", "key=value configuration file");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--data-dir", g.data_dir, "Data directory root")
      ->envname("TDCAT_DATA_DIR");
  app.add_option("--cadence", g.engine.cadence_s, "Seconds between frames");
  app.add_option("--zone-height", g.engine.zone_height_deg, "Zone height (deg)");
  app.add_option("--match-radius", g.engine.match_radius_deg, "Match radius (deg)");
  app.add_option("--zero-point", g.engine.mag_zero_point, "Photometric zero point");
  app.add_option("--density", g.density, "Sources per frame: full, 1/10, 1/100");
  app.add_option("--seed", g.seed, "Generator seed");
  app.add_option("--astrometric-sigma", g.astrometric_sigma_arcsec,
                 "Astrometric noise (arcsec)");
  app.add_option("--photometric-sigma", g.photometric_sigma, "Photometric noise (mag)");
  app.add_option("--window", g.mining.window, "Online window length W");
  app.add_option("--min-points", g.mining.min_points, "Window warm-up W_min");
  app.add_option("--k", g.mining.k, "Alert threshold in sigma");
  app.add_option("--persistence", g.mining.persistence_n,
                 "Consecutive frames for a new source");
  app.add_flag("--sync", g.sync, "fsync store writes");

  // generate
  auto* gen = app.add_subcommand("generate", "Write a template and synthetic frames");
  int gen_camera = 0;
  std::int64_t gen_frames = 10, gen_night = 0;
  std::string gen_inject, gen_truth_out;
  std::size_t gen_inject_count = 0;
  FrameFormat gen_format = FrameFormat::kCsv;
  const std::map<std::string, FrameFormat> formats{{"csv", FrameFormat::kCsv},
                                                   {"bin", FrameFormat::kBin}};
  gen->add_option("--partition,--camera", gen_camera, "Camera / partition id");
  gen->add_option("--format", gen_format, "Frame file format: csv or bin")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  gen->add_option("--frames", gen_frames, "Frames to write");
  gen->add_option("--night", gen_night, "Night id");
  gen->add_option("--inject", gen_inject, "Truth log of injections to apply");
  gen->add_option("--inject-count", gen_inject_count,
                  "Plan this many random injections (written to truth.csv)");

  // ingest
  auto* ing = app.add_subcommand("ingest", "Cross-match frame CSVs and append them");
  int ing_camera = 0;
  std::int64_t ing_night = 0;
  std::string ing_input, ing_template;
  FrameFormat ing_format = FrameFormat::kCsv;
  ing->add_option("--partition,--camera", ing_camera, "Partition id");
  ing->add_option("--night", ing_night, "Night id");
  ing->add_option("--input", ing_input,
                  "Frame file or directory of frame-NNNNNN files "
                  "(default: the generate output for this partition and night)");
  ing->add_option("--format", ing_format, "Frame file format: csv or bin")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  ing->add_option("--template", ing_template,
                  "Template CSV (default: template.csv beside the input)");

  // merge
  auto* mrg = app.add_subcommand("merge", "Fold a night's delta log into the base run");
  int mrg_camera = 0;
  std::int64_t mrg_night = 0;
  mrg->add_option("--partition,--camera", mrg_camera, "Partition id");
  mrg->add_option("--night", mrg_night, "Night id");

  // crossmatch
  auto* xm = app.add_subcommand("crossmatch", "Match one frame CSV against a template");
  std::vector<std::string> xm_frames;
  std::string xm_template, xm_out, xm_candidates;
  FrameFormat xm_format = FrameFormat::kCsv;
  std::optional<double> xm_radius, xm_zone_height;
  xm->add_option("--frame", xm_frames, "Frame file (repeatable)")->required();
  xm->add_option("--template", xm_template, "Template CSV")->required();
  xm->add_option("--format", xm_format, "Frame file format: csv or bin")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  xm->add_option("--radius-deg", xm_radius, "Match radius (deg)");
  xm->add_option("--zone-height-deg", xm_zone_height, "Zone height (deg)");
  xm->add_option("--matches,--out", xm_out, "Match CSV (default stdout)");
  xm->add_option("--candidates", xm_candidates, "Unmatched record ids CSV");

  // run-night
  auto* rn = app.add_subcommand("run-night", "Simulate one night on N partitions");
  int rn_partitions = 1, rn_workers = 0;
  std::int64_t rn_frames = 0, rn_night = 0;
  std::string rn_inject;
  bool rn_merge = false;
  rn->add_option("--partitions", rn_partitions, "Partitions 0..N-1");
  rn->add_option("--frames", rn_frames, "Frames per night (default: full night)");
  rn->add_option("--night", rn_night, "Night id");
  std::size_t rn_inject_count = 0;
  rn->add_option("--inject", rn_inject, "Truth log of injections");
  rn->add_option("--inject-count", rn_inject_count,
                 "Plan this many random injections per partition "
                 "(written to out/truth-night-NNNNNN.csv)");
  rn->add_option("--workers", rn_workers, "Concurrent partitions (0: all cores)");
  rn->add_flag("--merge", rn_merge, "Merge each partition after its last frame");

  // query
  auto* q = app.add_subcommand("query", "Scatter-gather queries over stored partitions");
  int q_partitions = 1, q_threads = 0;
  std::vector<int> q_ids;
  std::optional<double> q_ra, q_dec;
  double q_radius = 0.01;
  std::optional<StarId> q_star;
  double q_from = 0.0, q_to = 1e300;
  std::string q_out;
  q->add_option("--partitions", q_partitions, "Query partitions 0..N-1");
  q->add_option("--partition-ids", q_ids, "Explicit partition ids")->delimiter(',');
  q->add_option("--ra", q_ra, "Cone centre ra (deg)");
  q->add_option("--dec", q_dec, "Cone centre dec (deg)");
  q->add_option("--radius", q_radius, "Cone radius (deg)");
  q->add_option("--star", q_star, "Light curve of this star id");
  q->add_option("--from", q_from, "Earliest epoch");
  q->add_option("--to", q_to, "Latest epoch");
  q->add_option("--threads", q_threads, "Query threads");
  q->add_option("--out", q_out, "Output CSV (default stdout)");

  // mine
  auto* mine = app.add_subcommand("mine", "Transient and period mining");
  mine->require_subcommand(1);
  auto* online = mine->add_subcommand("online", "Replay stored partitions through the online detectors");
  int on_partitions = 1;
  std::string on_out;
  std::vector<int> on_ids;
  online->add_option("--partitions", on_partitions, "Partitions 0..N-1");
  online->add_option("--partition-ids", on_ids, "Explicit partition ids")->delimiter(',');
  online->add_option("--out", on_out, "Alert CSV (default stdout)");
  auto* period = mine->add_subcommand("period", "Lomb-Scargle period search for one star");
  StarId per_star = 0;
  int per_partitions = 1;
  double per_oversample = 10.0;
  std::string per_out, per_curve;
  period->add_option("--star", per_star, "Star id");
  std::vector<int> per_ids;
  period->add_option("--partitions", per_partitions, "Partitions 0..N-1");
  period->add_option("--partition-ids", per_ids, "Explicit partition ids")->delimiter(',');
  period->add_option("--curve", per_curve, "Read the light curve from this CSV instead");
  period->add_option("--oversample", per_oversample, "Frequency grid oversampling");
  period->add_option("--out", per_out, "Periodogram CSV");

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmarks");
  bench->require_subcommand(1);
  auto* bs = bench->add_subcommand("scaling", "Parallel efficiency at fixed total load");
  std::string bs_workers = "1,2,4,8";
  int bs_partitions = 0;
  std::int64_t bs_frames = 60;
  std::string bs_out;
  bs->add_option("--workers", bs_workers, "Comma-separated worker counts");
  bs->add_option("--partitions", bs_partitions, "Partitions (default: max workers)");
  bs->add_option("--frames", bs_frames, "Frames per partition");
  bs->add_option("--out", bs_out, "CSV (default stdout)");
  auto* bx = bench->add_subcommand("crossmatch", "Template build and join timing");
  std::string bx_sizes = "17560,35120,70240,175600";
  int bx_threads = 0;
  bx->add_option("--sizes", bx_sizes, "Comma-separated frame sizes");
  bx->add_option("--threads", bx_threads, "Join threads");

  // plan
  auto* plan = app.add_subcommand("plan", "Storage capacity projection");
  int plan_cameras = 36;
  std::int64_t plan_days = 1;
  double plan_bpr = static_cast<double>(kRecordBytes);
  bool plan_survey = false;
  plan->add_option("--cameras", plan_cameras, "Camera count");
  plan->add_option("--days", plan_days, "Observing days");
  plan->add_option("--bytes-per-record", plan_bpr, "Bytes per stored record");
  plan->add_flag("--survey", plan_survey, "One day, one year and ten years");

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitConfig;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "tdcat: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    g.engine.validate();
    g.mining.validate();
    if (!(g.astrometric_sigma_arcsec >= 0.0) || !(g.photometric_sigma >= 0.0)) {
      throw ConfigError("noise sigmas must be >= 0");
    }
    parse_density(g.density);

    if (*gen) {
      PipelineConfig cfg = pipeline_config(g);
      cfg.night_id = gen_night;
      if (gen_frames <= 0) throw ConfigError("--frames must be > 0");
      cfg.frames = gen_frames;
      const SkyModel model = partition_model(cfg, gen_camera);
      const auto templ = build_template(model, cfg.engine);
      auto inj = load_truth(gen_inject);
      if (gen_inject_count > 0) {
        InjectionPlan p;
        p.count = gen_inject_count;
        auto more = plan_injections(cfg, templ, gen_camera, g.seed, p);
        inj.insert(inj.end(), more.begin(), more.end());
      }
      const fs::path dir = frames_dir(g, gen_camera, gen_night);
      fs::create_directories(dir);
      {
        auto out = open_out(dir / "template.csv");
        write_template_csv(out, templ);
      }
      {
        auto out = open_out(dir / "truth.csv");
        write_truth_log(out, inj);
      }
      for (std::int64_t f = 0; f < gen_frames; ++f) {
        const double epoch = frame_epoch(gen_night, f, cfg.engine.cadence_s);
        const auto frame = observe_frame(templ, epoch, inj, model, cfg.engine);
        write_frame(dir / frame_file(std::llround(epoch / cfg.engine.cadence_s), gen_format),
                    gen_format, frame);
      }
      std::printf("wrote %lld frames of %zu stars to %s\n",
                  static_cast<long long>(gen_frames), templ.stars.size(), dir.c_str());
    } else if (*ing) {
      const fs::path input =
          ing_input.empty() ? frames_dir(g, ing_camera, ing_night) : fs::path(ing_input);
      const fs::path dir = fs::is_directory(input) ? input : input.parent_path();
      const fs::path tpath = ing_template.empty() ? dir / "template.csv" : fs::path(ing_template);
      const auto templ = load_template(tpath, g.engine.zone_height_deg);
      StoreOptions opts;
      opts.sync = g.sync;
      auto store = NightStore::open(g.data_dir, ing_camera, ing_night, opts);
      std::uint64_t records = 0, matched = 0;
      std::size_t frames = 0;
      for (const auto& path : list_frames(input, ing_format)) {
        FrameBatch frame;
        frame.camera_id = ing_camera;
        frame.epoch = static_cast<double>(frame_index_of(path)) * g.engine.cadence_s;
        frame.records = load_records(path, ing_format);
        for (const auto& r : frame.records) validate_record(r, g.engine);
        if (!frame.records.empty()) frame.imageid = frame.records.front().imageid;
        const auto res = range_join(frame, templ.index, g.engine.match_radius_deg);
        store.delta_insert(frame, res);
        records += frame.records.size();
        matched += res.matched.size();
        ++frames;
      }
      std::printf("ingested %zu frames, %llu records (%llu matched) into partition %d\n",
                  frames, static_cast<unsigned long long>(records),
                  static_cast<unsigned long long>(matched), ing_camera);
    } else if (*mrg) {
      StoreOptions opts;
      opts.sync = g.sync;
      auto store = NightStore::open(g.data_dir, mrg_camera, mrg_night, opts);
      const auto r = store.nightly_merge();
      std::printf("night,noop,segments,records_merged,base_records,generation,duration_s\n"
                  "%lld,%d,%zu,%zu,%zu,%llu,%.4f\n",
                  static_cast<long long>(r.night_id), r.noop ? 1 : 0, r.segments_merged,
                  r.records_merged, r.base_records,
                  static_cast<unsigned long long>(r.base_generation), r.duration_s);
    } else if (*xm) {
      const double zh = xm_zone_height.value_or(g.engine.zone_height_deg);
      const double radius = xm_radius.value_or(g.engine.match_radius_deg);
      EngineConfig check = g.engine;
      check.zone_height_deg = zh;
      check.match_radius_deg = radius;
      check.validate();
      const auto templ = load_template(xm_template, zh);
      std::vector<SourceRecord> records;
      for (const auto& f : xm_frames) {
        auto more = load_records(f, xm_format);
        records.insert(records.end(), more.begin(), more.end());
      }
      const auto res = range_join(records, templ.index, radius);
      emit(xm_out, [&](std::ostream& out) { write_matches_csv(out, res); });
      if (!xm_candidates.empty()) {
        emit(xm_candidates, [&](std::ostream& out) { write_candidates_csv(out, res); });
      }
      std::cerr << res.matched.size() << " matched, " << res.unmatched.size()
                << " unmatched, " << res.ambiguous_count << " ambiguous\n";
    } else if (*rn) {
      PipelineConfig cfg = pipeline_config(g);
      cfg.frames = rn_frames > 0 ? rn_frames : g.engine.frames_per_night();
      cfg.night_id = rn_night;
      cfg.workers = rn_workers;
      cfg.merge_at_end = rn_merge;
      const auto ids = partition_list(rn_partitions, {});
      auto inj = load_truth(rn_inject);
      if (rn_inject_count > 0) {
        InjectionPlan plan;
        plan.count = rn_inject_count;
        for (int id : ids) {
          const auto templ = build_template(partition_model(cfg, id), cfg.engine);
          auto more = plan_injections(cfg, templ, id, g.seed, plan);
          inj.insert(inj.end(), more.begin(), more.end());
        }
        char name[48];
        std::snprintf(name, sizeof name, "out/truth-night-%06lld.csv",
                      static_cast<long long>(rn_night));
        auto out = open_out(g.data_dir / name);
        write_truth_log(out, inj);
      }
      const auto reports = run_night(cfg, ids, inj);
      print_reports(reports, cfg.engine.cadence_s);
      const bool all_ok = std::all_of(reports.begin(), reports.end(),
                                      [](const CadenceReport& r) { return r.ok; });
      if (!all_ok) return kExitRuntime;
    } else if (*q) {
      const auto ids = partition_list(q_partitions, q_ids);
      if (q_star) {
        std::vector<StoreSnapshot> snaps;
        for (int id : ids) {
          try {
            snaps.push_back(NightStore::read_snapshot(g.data_dir, id));
          } catch (const StorageError& e) {
            throw PartialResultError(id, e.what());
          }
        }
        const auto curve = query_curve(snaps, *q_star, q_from, q_to);
        emit(q_out, [&](std::ostream& out) { write_curve_csv(out, curve); });
      } else {
        if (!q_ra || !q_dec) throw ConfigError("query needs --star or --ra/--dec");
        auto cone = cone_predicate({*q_ra, *q_dec}, q_radius);
        const double lo = q_from, hi = q_to;
        auto pred = [cone, lo, hi](const StoredRecord& r) {
          return r.epoch >= lo && r.epoch <= hi && cone(r);
        };
        const auto rows = scatter_gather_query(g.data_dir, ids, pred, q_threads);
        emit(q_out, [&](std::ostream& out) { write_stored_csv(out, rows); });
      }
    } else if (*online) {
      const auto ids = partition_list(on_partitions, on_ids);
      MiningConfig mc = g.mining;
      mc.match_radius_deg = g.engine.match_radius_deg;
      mc.cadence_s = g.engine.cadence_s;
      std::vector<Alert> alerts;
      for (int id : ids) {
        StoreSnapshot snap;
        try {
          snap = NightStore::read_snapshot(g.data_dir, id);
        } catch (const StorageError& e) {
          throw PartialResultError(id, e.what());
        }
        const auto rows = snap.read_all();
        auto a = replay_online(rows, mc);
        alerts.insert(alerts.end(), a.begin(), a.end());
      }
      emit(on_out, [&](std::ostream& out) { write_alerts_csv(out, alerts); });
    } else if (*period) {
      LightCurve curve;
      if (!per_curve.empty()) {
        std::ifstream in(per_curve);
        if (!in) throw ConfigError("cannot read " + per_curve);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
          const auto f = text::split(text::trim(line));
          if (f.size() < 2) continue;
          CurvePoint p;
          p.epoch = text::parse<double>(f[0], "epoch");
          p.calmag = text::parse<double>(f[1], "calmag");
          curve.points.push_back(p);
        }
      } else {
        std::vector<StoreSnapshot> snaps;
        for (int id : partition_list(per_partitions, per_ids)) {
          snaps.push_back(NightStore::read_snapshot(g.data_dir, id));
        }
        curve = query_curve(snaps, per_star, 0.0, 1e300);
      }
      const auto t = curve.epochs();
      const auto grid = default_frequency_grid(t, per_oversample);
      const auto p = period_search(curve, grid);
      const double level = false_alarm_power(0.01, grid.size());
      std::printf("points,best_period_s,best_frequency_hz,best_power,fap01_power\n"
                  "%zu,%.10g,%.10g,%.6g,%.6g\n",
                  curve.points.size(), p.best_period, p.best_frequency, p.best_power,
                  level);
      if (!per_out.empty()) {
        emit(per_out, [&](std::ostream& out) { write_periodogram_csv(out, p); });
      }
    } else if (*bs) {
      PipelineConfig cfg = pipeline_config(g);
      cfg.frames = bs_frames;
      cfg.persist = false;
      cfg.write_reports = false;
      cfg.retain_curves = false;
      const auto workers = parse_int_list(bs_workers, "--workers");
      const int parts =
          bs_partitions > 0 ? bs_partitions : *std::max_element(workers.begin(), workers.end());
      const auto rows = scaling_benchmark(cfg, workers, parts);
      emit(bs_out, [&](std::ostream& out) { write_scaling_csv(out, rows); });
    } else if (*bx) {
      std::printf("frame_size,template_size,build_s,join_s,records_per_s,matched\n");
      for (int n : parse_int_list(bx_sizes, "--sizes")) {
        PipelineConfig cfg = pipeline_config(g);
        cfg.stars_per_partition = n;
        const SkyModel model = partition_model(cfg, 0);
        const auto templ = build_template(model, cfg.engine);
        const auto frame = observe_frame(templ, 0.0, {}, model, cfg.engine);
        const auto t = crossmatch_throughput(frame.records, templ.points(),
                                             cfg.engine.match_radius_deg,
                                             cfg.engine.zone_height_deg, {bx_threads});
        std::printf("%zu,%zu,%.5f,%.5f,%.5g,%zu\n", t.frame_size, t.template_size,
                    t.build_s, t.join_s, t.records_per_s(), t.matched);
      }
    } else if (*plan) {
      EngineConfig cfg = g.engine;
      cfg.cameras = plan_cameras;
      const auto rows = plan_survey ? survey_plan(cfg, plan_bpr)
                                    : capacity_plan(cfg, plan_days, plan_bpr);
      write_plan_csv(std::cout, rows);
    }
  } catch (const ConfigError& e) {
    std::cerr << "tdcat: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "tdcat: invalid input: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "tdcat: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
