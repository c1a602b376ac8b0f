// Copyright 2026 The pdmwit Authors
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
#include <utility>
#include <vector>

namespace pdmwit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NonHermitian : public Error {
  public:
    using Error::Error;
};

class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

/// A value violates a documented precondition (bad probability, bad trace, ...).
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

class InvalidP : public Error {
  public:
    using Error::Error;
};

class NotSpatiallyIncompatible : public Error {
  public:
    using Error::Error;
};

class ZeroShots : public Error {
  public:
    using Error::Error;
};

class NoAsymmetricColumn : public Error {
  public:
    using Error::Error;
};

/// Raised when a correlator table lacks entries required by the caller.
class IncompleteTable : public Error {
  public:
    IncompleteTable(const std::string &what,
                    std::vector<std::pair<std::string, std::string>> missing)
        : Error(what), missing_(std::move(missing)) {}

    [[nodiscard]] const std::vector<std::pair<std::string, std::string>> &
    missing() const noexcept {
        return missing_;
    }

  private:
    std::vector<std::pair<std::string, std::string>> missing_;
};

} // namespace pdmwit
