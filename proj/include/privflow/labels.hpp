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

// Personal-data label vocabulary shared by node specs and the taint analysis.

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "privflow/value.hpp"

namespace privflow {

/// Holds when config[key] is one of `values`. An empty key always holds.
struct ConfigPredicate {
  std::string key;
  std::vector<Value> values;

  bool holds(const Value& config) const;
};

Value predicate_to_json(const ConfigPredicate& p);
ConfigPredicate predicate_from_json(const Value& doc);

enum class Category { identifier, sensitive, personal };
enum class Derivation { primary, secondary };

std::string_view to_string(Category c) noexcept;
std::string_view to_string(Derivation d) noexcept;

struct Condition {
  enum class Kind { granularity_at_most, requires_atom };

  Kind kind = Kind::granularity_at_most;
  std::int64_t period_ms = 0;  // granularity_at_most
  std::string tag;             // requires_atom

  static Condition granularity_at_most(std::int64_t ms) { return {Kind::granularity_at_most, ms, {}}; }
  static Condition requires_atom(std::string t) { return {Kind::requires_atom, 0, std::move(t)}; }

  auto operator<=>(const Condition&) const = default;
};

struct PersonalAtom {
  Category category = Category::personal;
  std::string tag;
  Derivation derivation = Derivation::primary;
  std::vector<Condition> conditions;

  static PersonalAtom primary(Category c, std::string tag) {
    return {c, std::move(tag), Derivation::primary, {}};
  }
  static PersonalAtom secondary(Category c, std::string tag, std::vector<Condition> when) {
    return {c, std::move(tag), Derivation::secondary, std::move(when)};
  }

  auto operator<=>(const PersonalAtom&) const = default;
};

/// Join-semilattice under set union.
using PersonalLabel = std::set<PersonalAtom>;

/// An atom a spec declares, optionally applicable only under some configs
/// (e.g. only when a multi-sensor source is set to its accelerometer).
struct AtomDecl {
  PersonalAtom atom;
  std::optional<ConfigPredicate> when;
};

struct LabelTransfer {
  enum class Kind { emit, passthrough_plus, filter, clear };

  Kind kind = Kind::passthrough_plus;
  std::vector<AtomDecl> atoms;  // emit, passthrough_plus
  // filter: drop atoms whose category name or tag is listed, statically or
  // in the string array config[drop_config_key].
  std::vector<std::string> drop;
  std::string drop_config_key;
};

Value condition_to_json(const Condition& c);
Condition condition_from_json(const Value& doc);
Value atom_to_json(const PersonalAtom& a);
PersonalAtom atom_from_json(const Value& doc);
Value label_to_json(const PersonalLabel& label);
PersonalLabel label_from_json(const Value& doc);
Value transfer_to_json(const LabelTransfer& t);
LabelTransfer transfer_from_json(const Value& doc);

/// Badge letters shown on a wire: subset of "PSI" in that order.
std::string badges(const PersonalLabel& label);

}  // namespace privflow
