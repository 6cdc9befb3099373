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

#include <cmath>
#include <random>

#include "tdcat/catalog.hpp"
#include "tdcat/error.hpp"
#include "test_support.hpp"

using namespace tdcat;

TEST_CASE("radec_to_cartesian axis cases") {
  auto v = radec_to_cartesian(0, 0);
  CHECK(v.x == doctest::Approx(1.0));
  CHECK(v.y == doctest::Approx(0.0));
  v = radec_to_cartesian(90, 0);
  CHECK(v.x == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(v.y == doctest::Approx(1.0));
  v = radec_to_cartesian(0, 90);
  CHECK(v.z == doctest::Approx(1.0));
  CHECK(std::abs(v.x) < 1e-15);
}

TEST_CASE("radec_to_cartesian rejects out-of-range input") {
  CHECK_THROWS_AS(radec_to_cartesian(0, 90.5), DomainError);
  CHECK_THROWS_AS(radec_to_cartesian(360.0, 0), DomainError);
  CHECK_THROWS_AS(radec_to_cartesian(-1e-9, 0), DomainError);
  CHECK_THROWS_AS(radec_to_cartesian(std::nan(""), 0), DomainError);
}

TEST_CASE("cartesian round trip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ra(0, 360), z(-1, 1);
  for (int i = 0; i < 20000; ++i) {
    const double a = ra(rng);
    const double d = std::asin(z(rng)) * kRadToDeg;
    const auto p = cartesian_to_radec(radec_to_cartesian(a, d));
    CHECK(std::abs(p.dec - d) < 1e-9);
    if (std::abs(d) < 89.9999) {
      double dra = std::abs(p.ra - a);
      dra = std::min(dra, 360.0 - dra);
      CHECK(dra < 1e-9);
    }
  }
}

TEST_CASE("angular_separation examples") {
  CHECK(angular_separation(SkyPosition{0, 0}, SkyPosition{0, 0}) == 0.0);
  CHECK(angular_separation(SkyPosition{0, 0}, SkyPosition{180, 0}) ==
        doctest::Approx(180.0));
  const double h = testing::haversine_deg(10.0, 20.0, 10.001, 20.0);
  CHECK(std::abs(angular_separation(SkyPosition{10.0, 20.0},
                                    SkyPosition{10.001, 20.0}) -
                 h) < 1e-9);
}

TEST_CASE("angular_separation agrees with haversine and is a metric") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ra(0, 360), z(-1, 1), small(-0.01, 0.01);
  for (int i = 0; i < 5000; ++i) {
    SkyPosition a{ra(rng), std::asin(z(rng)) * kRadToDeg};
    SkyPosition b{wrap_ra(a.ra + small(rng)),
                  std::clamp(a.dec + small(rng), -90.0, 90.0)};
    SkyPosition c{ra(rng), std::asin(z(rng)) * kRadToDeg};
    const double ab = angular_separation(a, b);
    CHECK(std::abs(ab - testing::haversine_deg(a.ra, a.dec, b.ra, b.dec)) < 1e-9);
    CHECK(ab == angular_separation(b, a));
    CHECK(ab >= 0.0);
    const double ac = angular_separation(a, c);
    const double bc = angular_separation(b, c);
    CHECK(ac <= ab + bc + 1e-12);
  }
}

TEST_CASE("zone_of examples") {
  CHECK(zone_of(-90, 0.01) == 0);
  CHECK(zone_of(0, 0.01) == 9000);
  CHECK(zone_of(90, 0.01) == 17999);
  CHECK(zone_count(0.01) == 18000);
  CHECK(zone_of(-0.004, 0.01) == 8999);
  CHECK(zone_of(0.014, 0.01) == 9001);
  CHECK(zone_count(0.7) == 258);
  CHECK(zone_of(90, 0.7) == 257);
  CHECK_THROWS_AS(zone_of(0, 0.0), ConfigError);
  CHECK_THROWS_AS(zone_of(91, 0.01), DomainError);
}

TEST_CASE("zone_of is monotone in declination") {
  ZoneId prev = 0;
  for (int i = 0; i <= 180000; ++i) {
    const ZoneId z = zone_of(-90.0 + i * 0.001, 0.01);
    CHECK(z >= prev);
    CHECK(z < zone_count(0.01));
    prev = z;
  }
}

TEST_CASE("photometry") {
  CHECK(mag_to_flux(25, 25) == 1.0);
  CHECK(mag_to_flux(30, 25) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(mag_to_flux(27.5, 25) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(propagate_flux_error(1.0, 0.0) == 0.0);
  CHECK(propagate_flux_error(1.0, 1.0) == doctest::Approx(0.4 * std::log(10.0)));
  CHECK(propagate_flux_error(0.01, 0.1) == doctest::Approx(9.21034037e-4));
  CHECK_THROWS_AS(propagate_flux_error(1.0, -0.1), DomainError);
  CHECK_THROWS_AS(mag_to_flux(std::nan(""), 25), DomainError);
}

TEST_CASE("make_record derives consistent fields") {
  EngineConfig cfg;
  const auto r = make_record(42, 7, 359.5, -12.25, 14.0, 0.03, cfg);
  CHECK(r.zone == zone_of(-12.25, cfg.zone_height_deg));
  CHECK(r.calmag == r.mag);
  CHECK(r.flux == doctest::Approx(mag_to_flux(14.0, 25.0)));
  CHECK(std::abs(r.x * r.x + r.y * r.y + r.z * r.z - 1.0) < 1e-12);
  CHECK_NOTHROW(validate_record(r, cfg));
  auto bad = r;
  bad.zone += 1;
  CHECK_THROWS_AS(validate_record(bad, cfg), DomainError);
}

TEST_CASE("engine config validation") {
  EngineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.frames_per_night() == 1920);
  cfg.match_radius_deg = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.zone_height_deg = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("density presets") {
  CHECK(sources_for(parse_density("full")) == 175600);
  CHECK(sources_for(parse_density("1/10")) == 17560);
  CHECK(sources_for(parse_density("1/100")) == 1756);
  CHECK(to_string(Density::kTenth) == "1/10");
  CHECK_THROWS_AS(parse_density("half"), ConfigError);
}

TEST_CASE("wrap_ra") {
  CHECK(wrap_ra(360.0) == 0.0);
  CHECK(wrap_ra(-0.5) == doctest::Approx(359.5));
  CHECK(wrap_ra(725.0) == doctest::Approx(5.0));
  CHECK(wrap_ra(-1e-18) < 360.0);
}
