// Copyright 2026 The QattenLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QATTENLAB_ERROR_HPP_
#define QATTENLAB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace qattenlab {

// Mismatched operand shapes (matmul inner dims, elementwise binaries, ...).
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// An operation was called outside its contract (backward on a non-scalar,
// stepping a finished episode, acting for a dead agent, ...).
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

// A run configuration or fixture file failed validation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A value left its validated domain at runtime (NaN/Inf in a loss, a payoff
// lookup out of range, ...).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem or serialization failure (unreadable checkpoint, bad checksum).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// An exhaustive procedure (joint-action enumeration, oracle search) was asked
// to cover a space larger than its stated capacity.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qattenlab

#endif  // QATTENLAB_ERROR_HPP_
