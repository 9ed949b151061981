// Copyright 2026 The privflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

#include <json.hpp>

namespace privflow {

/// Structured values flowing along wires. Object keys are kept sorted, so
/// dump() is canonical.
using Value = nlohmann::json;

/// Document-ordered JSON, used where a file format fixes key order.
using OrderedValue = nlohmann::ordered_json;

/// Seeded random stream. Only the raw mt19937_64 output is used (its sequence
/// is fixed by the standard); the range mappings below are ours, so generated
/// values are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi], both inclusive. Requires lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform in [lo, hi]; never leaves the closed interval.
  double uniform_real(double lo, double hi);

  bool coin() { return (next() >> 63) != 0; }

  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1));
  }

 private:
  std::mt19937_64 engine_;
};

/// Convert a sorted-key value to a document-ordered one (keys stay sorted).
OrderedValue to_ordered(const Value& v);
Value from_ordered(const OrderedValue& v);

}  // namespace privflow
