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

#include <stdexcept>
#include <string>

namespace tdcat {

// Error taxonomy. ConfigError is the only one the CLI maps to the
// "bad invocation" exit code; everything else is a runtime failure.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument value (out-of-range coordinate, negative error, ...).
class DomainError : public Error {
 public:
  DomainError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Epoch ordering violated (out-of-order append, misaligned cadence).
class SequencingError : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

/// A writer and a merge tried to hold the same partition at once.
class ConcurrencyError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Scatter-gather could not read one partition.
class PartialResultError : public Error {
 public:
  PartialResultError(int partition, const std::string& what)
      : Error("partition " + std::to_string(partition) + ": " + what),
        partition_(partition) {}
  int partition() const noexcept { return partition_; }

 private:
  int partition_;
};

}  // namespace tdcat
