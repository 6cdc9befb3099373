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
#include "tdcat/periodogram.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tdcat/error.hpp"
#include "tdcat/text.hpp"

namespace tdcat {

namespace {

struct Centered {
  std::vector<double> t;  // relative to the first epoch
  std::vector<double> y;  // mean subtracted
  double variance{0.0};   // sample variance
};

Centered center(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) {
    throw DomainError("values", "length differs from times");
  }
  Centered c;
  const std::size_t n = times.size();
  if (n == 0) return c;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  c.t.resize(n);
  c.y.resize(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c.t[i] = times[i] - times[0];
    c.y[i] = values[i] - mean;
    ss += c.y[i] * c.y[i];
  }
  c.variance = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  return c;
}

double power_at(const Centered& c, double freq) {
  const double omega = 2.0 * std::numbers::pi * freq;
  const std::size_t n = c.t.size();
  // tau from tan(2 w tau) = sum sin(2wt) / sum cos(2wt)
  double s2 = 0.0;
  double c2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * omega * c.t[i];
    s2 += std::sin(a);
    c2 += std::cos(a);
  }
  const double tau = std::atan2(s2, c2) / (2.0 * omega);
  double yc = 0.0, ys = 0.0, cc = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = omega * (c.t[i] - tau);
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    yc += c.y[i] * ca;
    ys += c.y[i] * sa;
    cc += ca * ca;
    ss += sa * sa;
  }
  double p = 0.0;
  if (cc > 0.0) p += yc * yc / cc;
  if (ss > 0.0) p += ys * ys / ss;
  return p / (2.0 * c.variance);
}

void check_freqs(std::span<const double> freqs) {
  for (double f : freqs) {
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw DomainError("freq_grid", "frequencies must be positive and finite");
    }
  }
}

}  // namespace

std::vector<double> default_frequency_grid(std::span<const double> times,
                                           double oversample) {
  if (times.size() < 2) {
    throw InsufficientDataError("frequency grid needs at least two epochs");
  }
  if (!(oversample >= 1.0)) throw ConfigError("oversample must be >= 1");
  std::vector<double> t(times.begin(), times.end());
  std::sort(t.begin(), t.end());
  const double span = t.back() - t.front();
  if (!(span > 0.0)) {
    throw InsufficientDataError("frequency grid needs a non-zero time span");
  }
  std::vector<double> dt;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] > t[i - 1]) dt.push_back(t[i] - t[i - 1]);
  }
  std::nth_element(dt.begin(), dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2),
                   dt.end());
  const double median_dt = dt[dt.size() / 2];
  const double f_min = 1.0 / span;
  const double f_max = 0.5 / median_dt;
  const double df = 1.0 / (oversample * span);
  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double f = f_min + static_cast<double>(k) * df;
    if (f > f_max) break;
    grid.push_back(f);
  }
  return grid;
}

std::vector<double> lomb_scargle_serial(std::span<const double> times,
                                        std::span<const double> values,
                                        std::span<const double> freqs) {
  check_freqs(freqs);
  const Centered c = center(times, values);
  std::vector<double> power(freqs.size(), 0.0);
  if (!(c.variance > 0.0)) return power;
  for (std::size_t k = 0; k < freqs.size(); ++k) power[k] = power_at(c, freqs[k]);
  return power;
}

std::vector<double> lomb_scargle(std::span<const double> times,
                                 std::span<const double> values,
                                 std::span<const double> freqs, int threads) {
  check_freqs(freqs);
  const Centered c = center(times, values);
  std::vector<double> power(freqs.size(), 0.0);
  if (!(c.variance > 0.0)) return power;
  const auto n = static_cast<std::ptrdiff_t>(freqs.size());
#ifdef _OPENMP
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(team)
#else
  (void)threads;
#endif
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    power[static_cast<std::size_t>(k)] =
        power_at(c, freqs[static_cast<std::size_t>(k)]);
  }
  return power;
}

Periodogram period_search(std::span<const double> times,
                          std::span<const double> values,
                          std::span<const double> freqs, int threads) {
  if (times.size() < 8) {
    throw InsufficientDataError("period search needs at least 8 points, got " +
                                std::to_string(times.size()));
  }
  if (freqs.empty()) throw DomainError("freq_grid", "must not be empty");
  Periodogram p;
  p.frequency.assign(freqs.begin(), freqs.end());
  p.power = lomb_scargle(times, values, freqs, threads);
  const auto best = std::max_element(p.power.begin(), p.power.end());
  const auto k = static_cast<std::size_t>(best - p.power.begin());
  p.best_frequency = p.frequency[k];
  p.best_period = 1.0 / p.best_frequency;
  p.best_power = *best;
  return p;
}

Periodogram period_search(const LightCurve& curve,
                          std::span<const double> freqs, int threads) {
  const auto t = curve.epochs();
  const auto y = curve.magnitudes();
  return period_search(t, y, freqs, threads);
}

double false_alarm_power(double fap, std::size_t independent_freqs) {
  if (!(fap > 0.0 && fap < 1.0)) throw DomainError("fap", "must lie in (0, 1)");
  if (independent_freqs == 0) {
    throw DomainError("independent_freqs", "must be > 0");
  }
  const double m = static_cast<double>(independent_freqs);
  // 1 - (1 - fap)^(1/M), computed without cancellation
  const double tail = -std::expm1(std::log1p(-fap) / m);
  return -std::log(tail);
}

void write_periodogram_csv(std::ostream& out, const Periodogram& p) {
  out << "frequency,power\n";
  std::string line;
  for (std::size_t i = 0; i < p.frequency.size(); ++i) {
    line.clear();
    text::append(line, p.frequency[i]);
    line += ',';
    text::append(line, p.power[i]);
    line += '\n';
    out << line;
  }
}

}  // namespace tdcat
