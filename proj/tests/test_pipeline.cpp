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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tdcat/error.hpp"
#include "tdcat/pipeline.hpp"
#include "tdcat/record_io.hpp"
#include "test_support.hpp"

using namespace tdcat;
namespace fs = std::filesystem;

namespace {

PipelineConfig small_config(const fs::path& root, std::int64_t frames = 10) {
  PipelineConfig c;
  c.root = root;
  c.seed = 21;
  c.stars_per_partition = 300;
  c.frames = frames;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("logical frame clock") {
  CHECK(frame_epoch(0, 0, 15) == 0.0);
  CHECK(frame_epoch(0, 7, 15) == 105.0);
  CHECK(frame_epoch(2, 1, 15) == 2 * 86400.0 + 15.0);
  CHECK(frame_epoch(1, 0, 7) == 12343.0 * 7);
}

TEST_CASE("one quiet partition for ten frames") {
  testing::TempDir dir("quiet");
  const auto cfg = small_config(dir.path());
  const std::vector<int> parts = {0};
  const auto reports = run_night(cfg, parts);
  REQUIRE(reports.size() == 1);
  const auto& r = reports[0];
  CHECK(r.ok);
  CHECK(r.frames.size() == 10);
  CHECK(r.records_ingested == 3000);
  CHECK(r.records_generated == r.records_ingested);
  CHECK(r.matched + r.unmatched == r.records_ingested);
  CHECK(r.alerts.empty());
  const auto out = report_dir(dir.path(), 0, 0);
  CHECK(line_count(out / "alerts.csv") == 1);
  CHECK(line_count(out / "matches.csv") == 3001);
  CHECK(line_count(out / "candidates.csv") == 1);
  CHECK(line_count(out / "cadence.csv") == 11);
  for (const auto& f : r.frames) {
    CHECK(f.stage_sum() <= f.total_s);
    CHECK(f.total_s < 15.0);
  }
  CHECK(r.budget_violations == 0);
  CHECK(r.throughput() > 0.0);
  CHECK(NightStore::read_snapshot(dir.path(), 0).read_all().size() == 3000);
}

TEST_CASE("partitions are isolated and conserve records") {
  testing::TempDir dir("iso");
  auto cfg = small_config(dir.path(), 6);
  cfg.workers = 2;
  // Partition 2 cannot create its store directory.
  fs::create_directories(dir.path());
  std::ofstream(NightStore::partition_dir(dir.path(), 2)) << "not a directory";
  const std::vector<int> parts = {0, 1, 2, 3};
  const auto reports = run_night(cfg, parts);
  REQUIRE(reports.size() == 4);
  std::uint64_t total = 0;
  for (const auto& r : reports) {
    if (r.partition == 2) {
      CHECK_FALSE(r.ok);
      CHECK(r.error.find("partition-02") != std::string::npos);
      continue;
    }
    CHECK(r.ok);
    CHECK(r.records_generated == r.records_ingested);
    CHECK(r.matched + r.unmatched == r.records_ingested);
    total += r.records_ingested;
  }
  CHECK(total == 3 * 6 * 300);
  const std::vector<int> good = {0, 1, 3};
  const auto all = scatter_gather_query(dir.path(), good,
                                        [](const StoredRecord&) { return true; });
  CHECK(all.size() == total);
  CHECK_THROWS_AS(scatter_gather_query(dir.path(), parts,
                                       [](const StoredRecord&) { return true; }),
                  PartialResultError);
  try {
    scatter_gather_query(dir.path(), parts, [](const StoredRecord&) { return true; });
  } catch (const PartialResultError& e) {
    CHECK(e.partition() == 2);
  }
}

TEST_CASE("configuration errors") {
  testing::TempDir dir("cfg");
  auto cfg = small_config(dir.path());
  const std::vector<int> twice = {1, 1};
  CHECK_THROWS_AS(run_night(cfg, twice), ConfigError);
  cfg.frames = 0;
  const std::vector<int> one = {0};
  CHECK_THROWS_AS(run_night(cfg, one), ConfigError);
}

TEST_CASE("cone search across partitions equals a scan of the generated frames") {
  testing::TempDir dir("cone");
  auto cfg = small_config(dir.path(), 8);
  const std::vector<int> parts = {0, 1, 18, 19};
  run_night(cfg, parts);

  // Oracle: regenerate every frame and scan with haversine distances.
  std::vector<SourceRecord> truth;
  for (int p : parts) {
    const SkyModel m = partition_model(cfg, p);
    const auto templ = build_template(m, cfg.engine);
    for (std::int64_t f = 0; f < cfg.frames; ++f) {
      auto fr = observe_frame(templ, frame_epoch(0, f, cfg.engine.cadence_s), {}, m,
                              cfg.engine);
      truth.insert(truth.end(), fr.records.begin(), fr.records.end());
    }
  }
  for (const auto& f : {camera_footprint(0), camera_footprint(18)}) {
    const SkyPosition c{f.ra_max, 0.0};  // corner shared by four cameras
    const double radius = 2.5;
    std::vector<std::uint64_t> expect;
    for (const auto& r : truth) {
      if (testing::haversine_deg(c.ra, c.dec, r.ra, r.dec) <= radius) {
        expect.push_back(r.id);
      }
    }
    const auto got1 = scatter_gather_query(dir.path(), parts,
                                           cone_predicate({wrap_ra(c.ra), c.dec}, radius), 1);
    const auto got4 = scatter_gather_query(dir.path(), parts,
                                           cone_predicate({wrap_ra(c.ra), c.dec}, radius), 4);
    CHECK(got1 == got4);
    std::vector<std::uint64_t> ids;
    for (const auto& r : got1) ids.push_back(r.source.id);
    CHECK(std::is_sorted(got1.begin(), got1.end(), [](const auto& a, const auto& b) {
      return a.epoch < b.epoch;
    }));
    std::sort(ids.begin(), ids.end());
    std::sort(expect.begin(), expect.end());
    CHECK(ids == expect);
    CHECK_FALSE(ids.empty());
  }
  const auto none = scatter_gather_query(dir.path(), parts,
                                         [](const StoredRecord&) { return false; });
  CHECK(none.empty());

  // Deleting one partition leaves the others' answers unchanged.
  const std::vector<int> rest = {0, 1, 19};
  const auto pred = cone_predicate({20.0, 0.0}, 3.0);
  const auto before = scatter_gather_query(dir.path(), rest, pred);
  fs::remove_all(NightStore::partition_dir(dir.path(), 18));
  CHECK(scatter_gather_query(dir.path(), rest, pred) == before);
}

TEST_CASE("replay determinism") {
  testing::TempDir a("det-a"), b("det-b");
  const std::vector<int> parts = {0, 7};
  std::vector<TransientInjection> inj;
  for (int p : parts) {
    auto cfg = small_config(a.path(), 40);
    const auto templ = build_template(partition_model(cfg, p), cfg.engine);
    auto more = plan_injections(cfg, templ, p, 5, InjectionPlan{});
    inj.insert(inj.end(), more.begin(), more.end());
  }
  for (const auto* d : {&a, &b}) {
    auto cfg = small_config(d->path(), 40);
    cfg.merge_at_end = true;
    run_night(cfg, parts, inj);
  }
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a.path());
    if (rel.filename() == "cadence.csv" || rel.filename() == "LOCK") continue;
    INFO(rel.string());
    CHECK(slurp(e.path()) == slurp(b.path() / rel));
    ++compared;
  }
  CHECK(compared >= 10);
  CHECK(line_count(report_dir(a.path(), 0, 0) / "alerts.csv") > 1);
}

TEST_CASE("injected transients are alerted") {
  testing::TempDir dir("inj");
  auto cfg = small_config(dir.path(), 120);
  cfg.persist = false;
  const std::vector<int> parts = {3, 4};
  std::vector<TransientInjection> inj;
  for (int p : parts) {
    const auto templ = build_template(partition_model(cfg, p), cfg.engine);
    auto more = plan_injections(cfg, templ, p, 11, InjectionPlan{.count = 8});
    CHECK(more.size() == 8);
    for (const auto& i : more) {
      CHECK(i.epoch_on >= frame_epoch(0, 10, 15));
      CHECK(i.epoch_off - i.epoch_on >= 2 * 15.0);
    }
    inj.insert(inj.end(), more.begin(), more.end());
  }
  const auto reports = run_night(cfg, parts, inj);
  std::vector<Alert> alerts;
  for (const auto& r : reports) {
    REQUIRE(r.ok);
    alerts.insert(alerts.end(), r.alerts.begin(), r.alerts.end());
  }
  const auto found = recovered_injections(inj, alerts, cfg.engine.match_radius_deg);
  CHECK(std::count(found.begin(), found.end(), true) == static_cast<long>(inj.size()));
  // Every alert is explained by some injection.
  for (const auto& a : alerts) {
    bool explained = false;
    for (const auto& i : inj) {
      const std::vector<TransientInjection> one = {i};
      const std::vector<Alert> just = {a};
      explained |= recovered_injections(one, just, cfg.engine.match_radius_deg)[0];
    }
    CHECK(explained);
  }
}

TEST_CASE("generate-free ingest matches the full chain") {
  testing::TempDir a("gf-a"), b("gf-b");
  auto ca = small_config(a.path(), 5);
  auto cb = small_config(b.path(), 5);
  PartitionWorker wa(2, ca), wb(2, cb);
  for (std::int64_t f = 0; f < 5; ++f) {
    wa.process(f);
    wb.ingest(wb.generate(f));
  }
  wa.finish();
  wb.finish();
  CHECK(wa.report().records_ingested == wb.report().records_ingested);
  CHECK(wa.store()->snapshot().read_all() == wb.store()->snapshot().read_all());
  CHECK(wa.curves().total_points() == wb.curves().total_points());
}

TEST_CASE("scaling benchmark rows") {
  testing::TempDir dir("scale");
  auto cfg = small_config(dir.path(), 4);
  cfg.persist = false;
  cfg.write_reports = false;
  const std::vector<int> workers = {1, 2};
  const auto rows = scaling_benchmark(cfg, workers, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].workers == 1);
  CHECK(rows[0].efficiency == doctest::Approx(1.0));
  CHECK(rows[1].records_per_s > 0.0);
  std::stringstream ss;
  write_scaling_csv(ss, rows);
  CHECK(ss.str().rfind("workers,wall_s,records_per_s,efficiency\n", 0) == 0);
}
