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

// Random schema generators for property tests. Small bounds and a small
// string alphabet keep most generated domains enumerable, and `perturb`
// derives related schemas so that both compatible and incompatible pairs
// show up in quantity.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "privflow/schema.hpp"

namespace privflow::testing {

struct SchemaGenOptions {
  int max_depth = 3;
  bool allow_unions = true;
  bool allow_numbers = true;
};

inline std::optional<double> maybe_bound(Rng& rng, int lo, int hi) {
  if (rng.uniform_int(0, 3) == 0) return std::nullopt;
  return static_cast<double>(rng.uniform_int(lo, hi));
}

inline Schema random_schema(Rng& rng, const SchemaGenOptions& opt, int depth = 0) {
  static const std::vector<std::string> kWords = {"a", "b", "c", "d"};
  static const std::vector<std::string> kNames = {"p", "q", "r"};
  const bool leaf = depth >= opt.max_depth;
  int pick = static_cast<int>(rng.uniform_int(0, leaf ? 3 : 6));
  if (pick == 2 && !opt.allow_numbers) pick = 1;
  if (pick == 6 && !opt.allow_unions) pick = 5;
  switch (pick) {
    case 0:
      return Schema::boolean();
    case 1: {
      auto lo = maybe_bound(rng, -3, 3);
      auto hi = maybe_bound(rng, -3, 6);
      if (lo && hi && *lo > *hi) std::swap(lo, hi);
      return Schema::integer(lo, hi);
    }
    case 2: {
      auto lo = maybe_bound(rng, -3, 3);
      auto hi = maybe_bound(rng, -3, 6);
      if (lo && hi && *lo > *hi) std::swap(lo, hi);
      if (rng.coin() && lo) *lo += 0.5;
      if (lo && hi && *lo > *hi) std::swap(lo, hi);
      return Schema::number(lo, hi);
    }
    case 3: {
      if (rng.uniform_int(0, 3) == 0) return Schema::string();
      std::vector<std::string> values;
      for (const auto& w : kWords) {
        if (rng.coin()) values.push_back(w);
      }
      if (values.empty()) values.push_back(kWords[rng.index(kWords.size())]);
      return Schema::string_enum(std::move(values));
    }
    case 4: {
      std::optional<std::uint64_t> lo;
      std::optional<std::uint64_t> hi;
      if (rng.coin()) lo = static_cast<std::uint64_t>(rng.uniform_int(0, 2));
      if (rng.uniform_int(0, 3) != 0) {
        hi = static_cast<std::uint64_t>(rng.uniform_int(0, 3));
        if (lo && *lo > *hi) std::swap(lo, hi);
      }
      return Schema::array(random_schema(rng, opt, depth + 1), lo, hi);
    }
    case 5: {
      std::vector<Property> props;
      std::vector<std::string> required;
      for (const auto& n : kNames) {
        if (rng.uniform_int(0, 2) == 0) continue;
        props.push_back(Property{n, random_schema(rng, opt, depth + 1)});
        if (rng.coin()) required.push_back(n);
      }
      return Schema::object(std::move(props), std::move(required));
    }
    default: {
      std::vector<Schema> arms;
      const auto n = rng.uniform_int(1, 3);
      for (int i = 0; i < n; ++i) arms.push_back(random_schema(rng, opt, depth + 1));
      return Schema::any_of(std::move(arms));
    }
  }
}

/// A schema related to `s`: some bounds widened or tightened, enum values
/// added or removed, properties added, dropped or re-flagged.
inline Schema perturb(const Schema& s, Rng& rng, const SchemaGenOptions& opt, int depth = 0) {
  if (rng.uniform_int(0, 9) == 0) return random_schema(rng, opt, depth);
  Schema out = s;
  switch (s.kind) {
    case Kind::integer:
    case Kind::number: {
      auto nudge = [&](std::optional<double>& b, double dir) {
        switch (rng.uniform_int(0, 3)) {
          case 0: b.reset(); break;
          case 1: if (b) *b += dir * static_cast<double>(rng.uniform_int(1, 2)); break;
          case 2: if (b) *b -= dir * static_cast<double>(rng.uniform_int(1, 2)); break;
          default: break;
        }
      };
      nudge(out.minimum, -1);
      nudge(out.maximum, 1);
      if (out.minimum && out.maximum && *out.minimum > *out.maximum) {
        std::swap(out.minimum, out.maximum);
      }
      if (s.kind == Kind::integer && rng.uniform_int(0, 4) == 0) out.kind = Kind::number;
      break;
    }
    case Kind::string: {
      if (rng.uniform_int(0, 4) == 0) {
        out.enumeration.reset();
      } else if (out.enumeration) {
        auto values = *out.enumeration;
        if (rng.coin() && values.size() > 1) values.erase(values.begin() + rng.index(values.size()));
        if (rng.coin()) {
          for (std::string w : {"a", "b", "c", "d"}) {
            if (std::find(values.begin(), values.end(), w) == values.end()) {
              values.push_back(w);
              break;
            }
          }
        }
        out.enumeration = std::move(values);
      }
      break;
    }
    case Kind::array: {
      out.items[0] = perturb(s.item(), rng, opt, depth + 1);
      if (rng.coin()) out.min_len.reset();
      if (rng.coin() && out.max_len) *out.max_len += 1;
      if (rng.uniform_int(0, 3) == 0) out.max_len.reset();
      break;
    }
    case Kind::object: {
      std::vector<Property> props;
      std::vector<std::string> required;
      for (const auto& p : s.properties) {
        if (rng.uniform_int(0, 5) == 0) continue;
        props.push_back(Property{p.name, rng.coin() ? perturb(p.schema, rng, opt, depth + 1) : p.schema});
        const bool req = s.is_required(p.name);
        if (rng.uniform_int(0, 4) == 0 ? !req : req) required.push_back(p.name);
      }
      if (rng.uniform_int(0, 3) == 0 && !s.property("r")) {
        props.push_back(Property{"r", random_schema(rng, opt, depth + 1)});
      }
      out = Schema::object(std::move(props), std::move(required));
      break;
    }
    case Kind::union_of: {
      for (auto& arm : out.arms) {
        if (rng.coin()) arm = perturb(arm, rng, opt, depth + 1);
      }
      break;
    }
    case Kind::boolean:
      break;
  }
  return out;
}

}  // namespace privflow::testing
