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

#include "privflow/value.hpp"

namespace privflow {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == UINT64_MAX) return static_cast<std::int64_t>(next());
  const std::uint64_t range = span + 1;
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % range);
}

double Rng::uniform_real(double lo, double hi) {
  if (!(lo < hi)) return lo;
  const double x = lo + uniform01() * (hi - lo);
  if (x < lo) return lo;
  if (x > hi) return hi;
  return x;
}

OrderedValue to_ordered(const Value& v) {
  switch (v.type()) {
    case Value::value_t::object: {
      OrderedValue out = OrderedValue::object();
      for (const auto& [k, item] : v.items()) out[k] = to_ordered(item);
      return out;
    }
    case Value::value_t::array: {
      OrderedValue out = OrderedValue::array();
      for (const auto& item : v) out.push_back(to_ordered(item));
      return out;
    }
    case Value::value_t::string: return v.get<std::string>();
    case Value::value_t::boolean: return v.get<bool>();
    case Value::value_t::number_integer: return v.get<std::int64_t>();
    case Value::value_t::number_unsigned: return v.get<std::uint64_t>();
    case Value::value_t::number_float: return v.get<double>();
    default: return nullptr;
  }
}

Value from_ordered(const OrderedValue& v) {
  switch (v.type()) {
    case OrderedValue::value_t::object: {
      Value out = Value::object();
      for (const auto& [k, item] : v.items()) out[k] = from_ordered(item);
      return out;
    }
    case OrderedValue::value_t::array: {
      Value out = Value::array();
      for (const auto& item : v) out.push_back(from_ordered(item));
      return out;
    }
    case OrderedValue::value_t::string: return v.get<std::string>();
    case OrderedValue::value_t::boolean: return v.get<bool>();
    case OrderedValue::value_t::number_integer: return v.get<std::int64_t>();
    case OrderedValue::value_t::number_unsigned: return v.get<std::uint64_t>();
    case OrderedValue::value_t::number_float: return v.get<double>();
    default: return nullptr;
  }
}

}  // namespace privflow
