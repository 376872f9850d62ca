// Copyright 2026 The qcrisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace qcrisk {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Mismatched vector or matrix sizes.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A value outside the domain an operation accepts.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Qubit or element index out of range.
class IndexError : public Error {
  public:
    using Error::Error;
};

/// Normalisation requested for a zero vector.
class ZeroNormError : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Least-squares system without full column rank.
class RankDeficiencyError : public Error {
  public:
    using Error::Error;
};

/// Failures reading IDX files. Each failure mode has its own type.
class IdxError : public Error {
  public:
    using Error::Error;
};

class IdxBadMagicError : public IdxError {
  public:
    using IdxError::IdxError;
};

class IdxTruncatedError : public IdxError {
  public:
    using IdxError::IdxError;
};

class IdxCountMismatchError : public IdxError {
  public:
    using IdxError::IdxError;
};

/// Invalid experiment configuration. `field()` names the offending entry as a
/// dotted path such as `training.learning_rate`.
class ConfigError : public Error {
  public:
    ConfigError(std::string field, const std::string &what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    [[nodiscard]] const std::string &field() const noexcept { return field_; }

  private:
    std::string field_;
};

} // namespace qcrisk
