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

// Offline period search with the normalized Lomb-Scargle periodogram
// (power in units of the sample variance; mean subtracted, time-offset
// tau per frequency). Handles arbitrary gaps between nights.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "tdcat/lightcurve.hpp"

namespace tdcat {

struct Periodogram {
  std::vector<double> frequency;  // Hz
  std::vector<double> power;
  double best_frequency{0.0};
  double best_period{0.0};
  double best_power{0.0};
};

/// Evenly spaced grid from 1/span up to the Nyquist frequency of the median
/// sampling interval, step 1/(oversample * span).
std::vector<double> default_frequency_grid(std::span<const double> times,
                                           double oversample = 10.0);

/// Evaluates power on `freqs`. Zero sample variance gives all-zero power.
/// `threads` sizes the OpenMP team (0: runtime default).
std::vector<double> lomb_scargle(std::span<const double> times,
                                 std::span<const double> values,
                                 std::span<const double> freqs,
                                 int threads = 0);

/// Single-threaded reference evaluation of the same periodogram.
std::vector<double> lomb_scargle_serial(std::span<const double> times,
                                        std::span<const double> values,
                                        std::span<const double> freqs);

/// Throws InsufficientDataError below 8 points and DomainError for a
/// non-positive or non-finite frequency.
Periodogram period_search(std::span<const double> times,
                          std::span<const double> values,
                          std::span<const double> freqs, int threads = 0);
Periodogram period_search(const LightCurve& curve,
                          std::span<const double> freqs, int threads = 0);

/// Power above which a peak has false-alarm probability below `fap` when
/// `independent_freqs` frequencies are searched: -ln(1 - (1 - fap)^(1/M)).
double false_alarm_power(double fap, std::size_t independent_freqs);

void write_periodogram_csv(std::ostream& out, const Periodogram& p);

}  // namespace tdcat
