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

// Port data types: a closed-world, decidable subset of json-schema.
//
// Every schema has a non-empty value domain (bounds are ordered, enums are
// non-empty, unions have arms), which is what makes the structural subtype
// check below exact on union-free schemas.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "privflow/value.hpp"

namespace privflow {

enum class Kind { boolean, integer, number, string, array, object, union_of };

std::string_view to_string(Kind kind) noexcept;

struct Property;

class Schema {
 public:
  Kind kind = Kind::boolean;

  // integer / number; inclusive, absent means unbounded.
  std::optional<double> minimum;
  std::optional<double> maximum;

  // string
  std::optional<std::vector<std::string>> enumeration;

  // array; `items` holds exactly one schema.
  std::vector<Schema> items;
  std::optional<std::uint64_t> min_len;
  std::optional<std::uint64_t> max_len;

  // object; properties sorted by name, required sorted.
  std::vector<Property> properties;
  std::vector<std::string> required;

  // union
  std::vector<Schema> arms;

  static Schema boolean();
  static Schema integer(std::optional<double> lo = {}, std::optional<double> hi = {});
  static Schema number(std::optional<double> lo = {}, std::optional<double> hi = {});
  static Schema string();
  static Schema string_enum(std::vector<std::string> values);
  static Schema array(Schema item, std::optional<std::uint64_t> min_len = {},
                      std::optional<std::uint64_t> max_len = {});
  static Schema object(std::vector<Property> props, std::vector<std::string> required);
  static Schema any_of(std::vector<Schema> arms);

  const Schema& item() const { return items.front(); }
  const Schema* property(std::string_view name) const;
  bool is_required(std::string_view name) const;

  friend bool operator==(const Schema& a, const Schema& b);
};

struct Property {
  std::string name;
  Schema schema;

  friend bool operator==(const Property&, const Property&) = default;
};

/// Throws Error(schema_error) naming the offending path when an invariant
/// does not hold.
void check_schema(const Schema& schema);

Schema schema_from_json(const Value& doc);
Value schema_to_json(const Schema& schema);

/// Short human-readable rendering, e.g. `number[0,130000]`, `object{lux,ts}`.
std::string describe(const Schema& schema);

/// True when no union appears anywhere in the schema.
bool is_union_free(const Schema& schema);

struct Violation {
  std::string path;
  std::string message;
};

struct Validation {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  explicit operator bool() const { return ok(); }
  std::vector<std::string> paths() const;
};

/// Paths use `.name` for properties and `[i]` for array elements; a
/// violation at the root is reported as `.`.
Validation validate_value(const Value& value, const Schema& schema);

struct Compat {
  bool compatible = true;
  std::string path;
  std::string reason;

  explicit operator bool() const { return compatible; }
};

/// Structural subtype check. Sound always, exact on union-free schemas.
/// A union consumer accepts a producer only if a single arm does.
Compat is_subtype(const Schema& producer, const Schema& consumer);

/// Intersection of two schemas: accepts exactly the values both accept.
/// nullopt when that set is empty.
std::optional<Schema> meet(const Schema& a, const Schema& b);

/// Upper bound: the wider schema when one contains the other, otherwise a
/// union of both.
Schema join(const Schema& a, const Schema& b);

/// Exact enumeration of a finite domain of at most `budget` values, or
/// nullopt when the domain is infinite or larger. Numbers are continuous and
/// never enumerable.
std::optional<std::vector<Value>> enumerate_values(const Schema& schema, std::size_t budget);

/// A sub-range for one field of a schema, keyed by field path (`.lux`,
/// `.readings[]`, `.` for the root).
struct FieldRange {
  std::optional<double> minimum;
  std::optional<double> maximum;
  std::optional<std::vector<std::string>> values;

  friend bool operator==(const FieldRange&, const FieldRange&) = default;
};

struct ValueProfile {
  std::string name;
  std::string description;
  std::map<std::string, FieldRange> ranges;

  friend bool operator==(const ValueProfile&, const ValueProfile&) = default;
};

/// Throws Error(schema_error) unless every profiled path exists in the
/// schema and every sub-range lies within the schema's own range.
void check_profile(const Schema& schema, const ValueProfile& profile);

ValueProfile profile_from_json(const Value& doc);
Value profile_to_json(const ValueProfile& profile);

/// A random schema-conforming value. When a profile is given, profiled
/// fields are drawn from the intersection of the schema range and the
/// profile sub-range; an empty intersection throws Error(generation_error).
Value generate_value(const Schema& schema, const ValueProfile* profile, Rng& rng);

}  // namespace privflow
