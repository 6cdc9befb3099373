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
// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "tdcat/crossmatch.hpp"
#include "tdcat/periodogram.hpp"
#include "tdcat/pipeline.hpp"
#include "tdcat/skygen.hpp"

namespace {

using namespace tdcat;

struct JoinFixture {
  TemplateCatalog templ;
  FrameBatch frame;
};

const JoinFixture& join_fixture(std::int64_t stars) {
  static std::map<std::int64_t, JoinFixture> cache;
  auto it = cache.find(stars);
  if (it == cache.end()) {
    PipelineConfig cfg;
    cfg.stars_per_partition = stars;
    const SkyModel model = partition_model(cfg, 0);
    JoinFixture f;
    f.templ = build_template(model, cfg.engine);
    f.frame = observe_frame(f.templ, 0.0, {}, model, cfg.engine);
    it = cache.emplace(stars, std::move(f)).first;
  }
  return it->second;
}

void BM_RangeJoinSerial(benchmark::State& state) {
  const auto& f = join_fixture(state.range(0));
  for (auto _ : state) {
    auto r = range_join_serial(f.frame.records, f.templ.index, 5.0 / 3600.0);
    benchmark::DoNotOptimize(r.matched.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_RangeJoinParallel(benchmark::State& state) {
  const auto& f = join_fixture(state.range(0));
  for (auto _ : state) {
    auto r = range_join(f.frame.records, f.templ.index, 5.0 / 3600.0);
    benchmark::DoNotOptimize(r.matched.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct Series {
  std::vector<double> t, y, freqs;
};

Series series(std::size_t n) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(0.0, 0.02);
  Series s;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 15.0 * static_cast<double>(i);
    s.t.push_back(t);
    s.y.push_back(13.0 + 0.3 * std::sin(2 * std::numbers::pi * t / 300.0) + noise(rng));
  }
  s.freqs = default_frequency_grid(s.t);
  return s;
}

void BM_LombScargleSerial(benchmark::State& state) {
  const auto s = series(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto p = lomb_scargle_serial(s.t, s.y, s.freqs);
    benchmark::DoNotOptimize(p.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.freqs.size()));
}

void BM_LombScargleParallel(benchmark::State& state) {
  const auto s = series(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto p = lomb_scargle(s.t, s.y, s.freqs);
    benchmark::DoNotOptimize(p.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.freqs.size()));
}

}  // namespace

BENCHMARK(BM_RangeJoinSerial)->Arg(17560)->Arg(175600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RangeJoinParallel)->Arg(17560)->Arg(175600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LombScargleSerial)->Arg(480)->Arg(1920)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LombScargleParallel)->Arg(480)->Arg(1920)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
