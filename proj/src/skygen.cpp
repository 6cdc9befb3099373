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
#include "tdcat/skygen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>

#include "tdcat/error.hpp"
#include "tdcat/text.hpp"

namespace tdcat {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(seed ^ splitmix64(a)) ^ splitmix64(b + 1));
}

/// Standard normal truncated at |z| <= 5 by resampling.
double truncated_normal(std::mt19937_64& rng,
                        std::normal_distribution<double>& normal) {
  while (true) {
    const double z = normal(rng);
    if (std::abs(z) <= 5.0) return z;
  }
}

/// Dynamic grid used only to enforce minimum spacing while sampling.
class SpacingGrid {
 public:
  explicit SpacingGrid(double cell_deg) : cell_(cell_deg) {}

  bool clear_of(const Vec3& v, double ra, double dec, double min_sep) const {
    const auto dz = static_cast<std::int64_t>(std::floor((dec + 90.0) / cell_));
    const double half = ra_search_halfwidth(dec, min_sep);
    const auto n = ra_cells();
    const auto rspan = static_cast<std::int64_t>(std::ceil(half / cell_)) + 1;
    const bool full = half >= 180.0 || 2 * rspan + 1 >= n;
    const auto rc = ra_cell(ra);
    for (std::int64_t zc = dz - 1; zc <= dz + 1; ++zc) {
      const std::int64_t first = full ? 0 : rc - rspan;
      const std::int64_t last = full ? n - 1 : rc + rspan;
      for (std::int64_t c = first; c <= last; ++c) {
        const auto it = cells_.find(key(zc, wrap_cell(c)));
        if (it == cells_.end()) continue;
        for (const Vec3& u : it->second) {
          if (angular_separation(v, u) < min_sep) return false;
        }
      }
    }
    return true;
  }

  void insert(const Vec3& v, double ra, double dec) {
    const auto zc = static_cast<std::int64_t>(std::floor((dec + 90.0) / cell_));
    cells_[key(zc, ra_cell(ra))].push_back(v);
  }

 private:
  std::int64_t ra_cells() const {
    return static_cast<std::int64_t>(std::ceil(360.0 / cell_));
  }
  std::int64_t ra_cell(double ra) const {
    return static_cast<std::int64_t>(std::floor(ra / cell_));
  }
  std::int64_t wrap_cell(std::int64_t c) const {
    const auto n = ra_cells();
    return ((c % n) + n) % n;
  }
  static std::int64_t key(std::int64_t zc, std::int64_t rc) {
    return zc * 100000000LL + rc;
  }

  double cell_;
  std::unordered_map<std::int64_t, std::vector<Vec3>> cells_;
};

double pixel_coordinate(double offset, double extent) {
  const double p = offset / extent * kPixelExtent;
  return std::clamp(p, 0.0, std::nextafter(kPixelExtent, 0.0));
}

}  // namespace

double Footprint::area_deg2() const {
  if (ra_max <= ra_min || dec_max <= dec_min) return 0.0;
  return (ra_max - ra_min) * kDegToRad *
         (std::sin(dec_max * kDegToRad) - std::sin(dec_min * kDegToRad)) *
         kRadToDeg * kRadToDeg;
}

bool Footprint::contains(double ra, double dec) const {
  return ra >= ra_min && ra < ra_max && dec >= dec_min && dec <= dec_max;
}

void SkyModel::validate() const {
  const Footprint& f = footprint;
  if (!(f.ra_min >= 0.0 && f.ra_max <= 360.0 && f.dec_min >= -90.0 &&
        f.dec_max <= 90.0)) {
    throw ConfigError("footprint outside the sphere");
  }
  if (f.area_deg2() <= 0.0) throw ConfigError("footprint has zero area");
  if (star_count < 0) throw ConfigError("star_count must be >= 0");
  if (!(mag_bright < mag_faint)) {
    throw ConfigError("mag range must satisfy bright < faint");
  }
  if (!(astrometric_sigma_deg >= 0.0) || !(photometric_sigma_mag >= 0.0)) {
    throw ConfigError("noise sigmas must be >= 0");
  }
  if (!(min_separation_deg >= 0.0)) {
    throw ConfigError("min_separation_deg must be >= 0");
  }
}

std::vector<CatalogPoint> TemplateCatalog::points() const {
  std::vector<CatalogPoint> out;
  out.reserve(stars.size());
  for (const auto& s : stars) out.push_back({s.star_id, s.ra, s.dec});
  return out;
}

std::ptrdiff_t TemplateCatalog::find(StarId id) const {
  const auto it = std::lower_bound(
      id_lookup.begin(), id_lookup.end(), id,
      [](const auto& entry, StarId v) { return entry.first < v; });
  if (it == id_lookup.end() || it->first != id) return -1;
  return static_cast<std::ptrdiff_t>(it->second);
}

TemplateCatalog make_template(std::vector<TemplateStar> stars,
                              double zone_height_deg) {
  std::sort(stars.begin(), stars.end(),
            [&](const TemplateStar& a, const TemplateStar& b) {
              const ZoneId za = zone_of(a.dec, zone_height_deg);
              const ZoneId zb = zone_of(b.dec, zone_height_deg);
              if (za != zb) return za < zb;
              if (a.ra != b.ra) return a.ra < b.ra;
              return a.star_id < b.star_id;
            });
  TemplateCatalog cat;
  cat.stars = std::move(stars);
  cat.index = ZoneIndex::build(cat.points(), zone_height_deg);
  cat.id_lookup.reserve(cat.stars.size());
  for (std::size_t i = 0; i < cat.stars.size(); ++i) {
    cat.id_lookup.emplace_back(cat.stars[i].star_id, i);
  }
  std::sort(cat.id_lookup.begin(), cat.id_lookup.end());
  return cat;
}

TemplateCatalog build_template(const SkyModel& model,
                               const EngineConfig& config) {
  model.validate();
  const Footprint& f = model.footprint;
  std::mt19937_64 rng(mix_seed(model.seed, 0x7e3a11ULL,
                               static_cast<std::uint64_t>(model.camera_id)));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double s_lo = std::sin(f.dec_min * kDegToRad);
  const double s_hi = std::sin(f.dec_max * kDegToRad);

  std::vector<TemplateStar> stars;
  stars.reserve(static_cast<std::size_t>(model.star_count));
  const bool spaced = model.min_separation_deg > 0.0;
  SpacingGrid grid(spaced ? model.min_separation_deg : 1.0);
  const std::int64_t max_attempts = 50 * model.star_count + 1000;
  std::int64_t attempts = 0;
  while (static_cast<std::int64_t>(stars.size()) < model.star_count) {
    if (++attempts > max_attempts) {
      throw ConfigError("footprint too crowded for min_separation_deg");
    }
    const double ra =
        std::min(f.ra_min + (f.ra_max - f.ra_min) * u01(rng),
                 std::nextafter(f.ra_max, f.ra_min));
    const double sd = s_lo + (s_hi - s_lo) * u01(rng);
    const double dec =
        std::clamp(std::asin(std::clamp(sd, -1.0, 1.0)) * kRadToDeg,
                   f.dec_min, f.dec_max);
    const double mag =
        model.mag_bright + (model.mag_faint - model.mag_bright) * u01(rng);
    const double ra_w = wrap_ra(ra);
    if (spaced) {
      const Vec3 v = radec_to_cartesian(ra_w, dec);
      if (!grid.clear_of(v, ra_w, dec, model.min_separation_deg)) continue;
      grid.insert(v, ra_w, dec);
    }
    const auto index = static_cast<StarId>(stars.size());
    stars.push_back({model.star_id_offset + index + 1, ra_w, dec, mag});
  }
  return make_template(std::move(stars), config.zone_height_deg);
}

std::string_view to_string(InjectionKind k) {
  return k == InjectionKind::kNewSource ? "new_source" : "brightening";
}

InjectionKind parse_injection_kind(std::string_view text) {
  if (text == "new_source") return InjectionKind::kNewSource;
  if (text == "brightening") return InjectionKind::kBrightening;
  throw DomainError("kind", "unknown injection kind '" + std::string(text) + "'");
}

void TransientInjection::validate() const {
  if (!(epoch_on < epoch_off)) {
    throw DomainError("epoch_on", "must be < epoch_off");
  }
  if (kind == InjectionKind::kNewSource) {
    if (!(position.ra >= 0.0 && position.ra < 360.0 &&
          position.dec >= -90.0 && position.dec <= 90.0)) {
      throw DomainError("position", "outside the sphere");
    }
  } else if (target_star == kNoStar) {
    throw DomainError("target_star", "brightening needs a target star");
  }
}

std::uint32_t make_imageid(int camera_id, std::int64_t frame_seq) {
  return (static_cast<std::uint32_t>(camera_id & 0xff) << 24) |
         static_cast<std::uint32_t>(frame_seq & 0xffffff);
}

std::uint64_t make_record_id(std::uint32_t imageid, std::uint32_t index) {
  return (static_cast<std::uint64_t>(imageid) << 24) | (index & 0xffffffu);
}

FrameBatch observe_frame(const TemplateCatalog& templ, double epoch,
                         std::span<const TransientInjection> injections,
                         const SkyModel& model, const EngineConfig& config) {
  const double steps = epoch / config.cadence_s;
  const double frame_seq_d = std::round(steps);
  if (!std::isfinite(steps) || std::abs(steps - frame_seq_d) > 1e-9 ||
      frame_seq_d < 0.0) {
    throw SequencingError("epoch " + text::format(epoch) +
                          " is not on the cadence grid");
  }
  const auto frame_seq = static_cast<std::int64_t>(frame_seq_d);

  FrameBatch frame;
  frame.camera_id = model.camera_id;
  frame.epoch = epoch;
  frame.imageid = make_imageid(model.camera_id, frame_seq);

  // Per-star magnitude offsets from active brightening injections.
  std::vector<std::pair<std::size_t, double>> shifts;
  for (const auto& inj : injections) {
    if (inj.kind != InjectionKind::kBrightening || !inj.active_at(epoch)) {
      continue;
    }
    const auto pos = templ.find(inj.target_star);
    if (pos >= 0) shifts.emplace_back(static_cast<std::size_t>(pos), inj.delta_mag);
  }
  std::sort(shifts.begin(), shifts.end());

  std::mt19937_64 rng(mix_seed(model.seed,
                               static_cast<std::uint64_t>(model.camera_id),
                               static_cast<std::uint64_t>(frame_seq)));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sa = model.astrometric_sigma_deg;
  const double sp = model.photometric_sigma_mag;
  const Footprint& f = model.footprint;

  auto emit = [&](std::uint32_t index, double ra0, double dec0, double mag0) {
    double dec = dec0;
    double ra = ra0;
    if (sa > 0.0) {
      dec = std::clamp(dec0 + sa * truncated_normal(rng, normal), -90.0, 90.0);
      const double cosd = std::max(std::cos(dec0 * kDegToRad), 1e-6);
      ra = wrap_ra(ra0 + sa / cosd * truncated_normal(rng, normal));
    }
    const double mag = sp > 0.0 ? mag0 + sp * truncated_normal(rng, normal) : mag0;
    SourceRecord r = make_record(make_record_id(frame.imageid, index),
                                 frame.imageid, ra, dec, mag, sp, config);
    r.ra_err = sa;
    r.dec_err = sa;
    r.pixel_x = pixel_coordinate(wrap_ra(ra - f.ra_min), f.ra_max - f.ra_min);
    r.pixel_y = pixel_coordinate(dec - f.dec_min, f.dec_max - f.dec_min);
    r.flag = 0;
    r.background = 1000.0 + static_cast<double>(index % 200) * 0.5;
    r.threshold = 3.0;
    r.ellipticity = static_cast<double>(index % 100) * 0.003;
    r.class_star = 0.9 + static_cast<double>(index % 11) * 0.009;
    frame.records.push_back(r);
  };

  frame.records.reserve(templ.stars.size() + injections.size());
  std::size_t next_shift = 0;
  for (std::size_t i = 0; i < templ.stars.size(); ++i) {
    const TemplateStar& s = templ.stars[i];
    double mag = s.mag;
    while (next_shift < shifts.size() && shifts[next_shift].first == i) {
      mag += shifts[next_shift++].second;
    }
    emit(static_cast<std::uint32_t>(i), s.ra, s.dec, mag);
  }
  auto index = static_cast<std::uint32_t>(templ.stars.size());
  for (const auto& inj : injections) {
    if (inj.kind != InjectionKind::kNewSource || !inj.active_at(epoch)) continue;
    emit(index++, inj.position.ra, inj.position.dec, inj.mag);
  }
  sort_by_zone_ra(frame.records);
  return frame;
}

void write_template_csv(std::ostream& out, const TemplateCatalog& templ) {
  out << "star_id,ra,dec,mag\n";
  std::string line;
  for (const auto& s : templ.stars) {
    line.clear();
    text::append(line, s.star_id);
    for (double v : {s.ra, s.dec, s.mag}) {
      line += ',';
      text::append(line, v);
    }
    line += '\n';
    out << line;
  }
}

std::vector<TemplateStar> read_template_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "star_id,ra,dec,mag") {
    throw DomainError("template header", "expected 'star_id,ra,dec,mag'");
  }
  std::vector<TemplateStar> stars;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    const auto f = text::split(text::trim(line));
    if (f.size() != 4) throw DomainError("template row", "expected 4 fields");
    TemplateStar s;
    s.star_id = text::parse<StarId>(f[0], "star_id");
    s.ra = text::parse<double>(f[1], "ra");
    s.dec = text::parse<double>(f[2], "dec");
    s.mag = text::parse<double>(f[3], "mag");
    radec_to_cartesian(s.ra, s.dec);  // range check
    stars.push_back(s);
  }
  return stars;
}

void write_truth_log(std::ostream& out,
                     std::span<const TransientInjection> injections) {
  out << "kind,epoch_on,epoch_off,ra,dec,target_star,delta_mag,mag\n";
  std::string line;
  for (const auto& inj : injections) {
    line.clear();
    line += to_string(inj.kind);
    for (double v : {inj.epoch_on, inj.epoch_off, inj.position.ra,
                     inj.position.dec}) {
      line += ',';
      text::append(line, v);
    }
    line += ',';
    text::append(line, inj.target_star);
    line += ',';
    text::append(line, inj.delta_mag);
    line += ',';
    text::append(line, inj.mag);
    line += '\n';
    out << line;
  }
}

std::vector<TransientInjection> read_truth_log(std::istream& in) {
  std::vector<TransientInjection> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (text::trim(line).empty() || line.front() == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("kind,", 0) == 0) continue;
    }
    const auto f = text::split(line);
    if (f.size() != 8) {
      throw DomainError("truth log", "expected 8 fields, got " +
                                         std::to_string(f.size()));
    }
    TransientInjection inj;
    inj.kind = parse_injection_kind(text::trim(f[0]));
    inj.epoch_on = text::parse<double>(f[1], "epoch_on");
    inj.epoch_off = text::parse<double>(f[2], "epoch_off");
    inj.position.ra = text::parse<double>(f[3], "ra");
    inj.position.dec = text::parse<double>(f[4], "dec");
    inj.target_star = text::parse<StarId>(f[5], "target_star");
    inj.delta_mag = text::parse<double>(f[6], "delta_mag");
    inj.mag = text::parse<double>(f[7], "mag");
    inj.validate();
    out.push_back(inj);
  }
  return out;
}

Footprint camera_footprint(int camera_id) {
  if (camera_id < 0 || camera_id >= 36) {
    throw ConfigError("camera id must lie in [0, 36)");
  }
  const int col = camera_id % 18;
  const int row = camera_id / 18;
  Footprint f;
  f.ra_min = 20.0 * col;
  f.ra_max = 20.0 * (col + 1);
  f.dec_min = row == 0 ? -7.0 : 0.0;
  f.dec_max = row == 0 ? 0.0 : 7.0;
  return f;
}

double unambiguous_separation(double astrometric_sigma_deg) {
  // Worst-case displacement is 5 sigma on each axis; two records must stay
  // apart by twice that, plus a margin for the ra/cos(dec) approximation.
  return 2.0 * 5.0 * std::sqrt(2.0) * astrometric_sigma_deg * 1.1;
}

}  // namespace tdcat
