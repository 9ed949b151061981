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

#include "privflow/schema.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "privflow/error.hpp"

namespace privflow {

namespace {

// Integer bounds are stored as doubles; beyond 2^53 they would stop being
// exact, so integer schemas are limited to that magnitude.
constexpr double kMaxExactInteger = 9007199254740992.0;

std::string shown(const std::string& path) { return path.empty() ? "." : path; }

std::string child(const std::string& path, const std::string& name) { return path + "." + name; }

std::string format_number(double v) {
  if (std::floor(v) == v && std::fabs(v) < kMaxExactInteger) {
    return std::to_string(static_cast<std::int64_t>(v));
  }
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Value number_to_json(double v) {
  if (std::floor(v) == v && std::fabs(v) < kMaxExactInteger) {
    return static_cast<std::int64_t>(v);
  }
  return v;
}

[[noreturn]] void schema_fail(const std::string& path, const std::string& message) {
  throw Error(Errc::schema_error, shown(path), message);
}

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

}  // namespace

std::string_view to_string(Kind kind) noexcept {
  switch (kind) {
    case Kind::boolean: return "boolean";
    case Kind::integer: return "integer";
    case Kind::number: return "number";
    case Kind::string: return "string";
    case Kind::array: return "array";
    case Kind::object: return "object";
    case Kind::union_of: return "union";
  }
  return "?";
}

Schema Schema::boolean() { return Schema{}; }

Schema Schema::integer(std::optional<double> lo, std::optional<double> hi) {
  Schema s;
  s.kind = Kind::integer;
  s.minimum = lo;
  s.maximum = hi;
  return s;
}

Schema Schema::number(std::optional<double> lo, std::optional<double> hi) {
  Schema s;
  s.kind = Kind::number;
  s.minimum = lo;
  s.maximum = hi;
  return s;
}

Schema Schema::string() {
  Schema s;
  s.kind = Kind::string;
  return s;
}

Schema Schema::string_enum(std::vector<std::string> values) {
  Schema s = string();
  s.enumeration = std::move(values);
  return s;
}

Schema Schema::array(Schema item, std::optional<std::uint64_t> min_len,
                     std::optional<std::uint64_t> max_len) {
  Schema s;
  s.kind = Kind::array;
  s.items.push_back(std::move(item));
  s.min_len = min_len;
  s.max_len = max_len;
  return s;
}

Schema Schema::object(std::vector<Property> props, std::vector<std::string> required) {
  Schema s;
  s.kind = Kind::object;
  std::sort(props.begin(), props.end(),
            [](const Property& a, const Property& b) { return a.name < b.name; });
  std::sort(required.begin(), required.end());
  required.erase(std::unique(required.begin(), required.end()), required.end());
  s.properties = std::move(props);
  s.required = std::move(required);
  return s;
}

Schema Schema::any_of(std::vector<Schema> arms) {
  Schema s;
  s.kind = Kind::union_of;
  s.arms = std::move(arms);
  return s;
}

const Schema* Schema::property(std::string_view name) const {
  auto it = std::lower_bound(properties.begin(), properties.end(), name,
                             [](const Property& p, std::string_view n) { return p.name < n; });
  if (it == properties.end() || it->name != name) return nullptr;
  return &it->schema;
}

bool Schema::is_required(std::string_view name) const {
  return std::binary_search(required.begin(), required.end(), name);
}

bool operator==(const Schema& a, const Schema& b) {
  return a.kind == b.kind && a.minimum == b.minimum && a.maximum == b.maximum &&
         a.enumeration == b.enumeration && a.items == b.items && a.min_len == b.min_len &&
         a.max_len == b.max_len && a.properties == b.properties && a.required == b.required &&
         a.arms == b.arms;
}

// ---------------------------------------------------------------------------
// Well-formedness

namespace {

void check_at(const Schema& s, const std::string& path) {
  const bool numeric = s.kind == Kind::integer || s.kind == Kind::number;
  if (!numeric && (s.minimum || s.maximum)) schema_fail(path, "min/max only apply to numbers");
  if (s.kind != Kind::string && s.enumeration) schema_fail(path, "enum only applies to strings");
  if (s.kind != Kind::array && (!s.items.empty() || s.min_len || s.max_len)) {
    schema_fail(path, "items/minLen/maxLen only apply to arrays");
  }
  if (s.kind != Kind::object && (!s.properties.empty() || !s.required.empty())) {
    schema_fail(path, "properties/required only apply to objects");
  }
  if (s.kind != Kind::union_of && !s.arms.empty()) schema_fail(path, "arms only apply to unions");

  switch (s.kind) {
    case Kind::boolean:
    case Kind::string:
      if (s.enumeration) {
        if (s.enumeration->empty()) schema_fail(path, "enum must not be empty");
        std::set<std::string> seen;
        for (const auto& v : *s.enumeration) {
          if (!seen.insert(v).second) schema_fail(path, "duplicate enum value \"" + v + "\"");
        }
      }
      break;
    case Kind::integer:
    case Kind::number:
      for (const auto& bound : {s.minimum, s.maximum}) {
        if (!bound) continue;
        if (!std::isfinite(*bound)) schema_fail(path, "bounds must be finite");
        if (s.kind == Kind::integer &&
            (!is_integral(*bound) || std::fabs(*bound) > kMaxExactInteger)) {
          schema_fail(path, "integer bounds must be integers within +/-2^53");
        }
      }
      if (s.minimum && s.maximum && *s.minimum > *s.maximum) schema_fail(path, "min > max");
      break;
    case Kind::array:
      if (s.items.size() != 1) schema_fail(path, "array needs exactly one items schema");
      if (s.min_len && s.max_len && *s.min_len > *s.max_len) {
        schema_fail(path, "minLen > maxLen");
      }
      check_at(s.item(), path + "[]");
      break;
    case Kind::object: {
      for (std::size_t i = 1; i < s.properties.size(); ++i) {
        if (!(s.properties[i - 1].name < s.properties[i].name)) {
          schema_fail(path, "properties must be unique and sorted");
        }
      }
      for (std::size_t i = 1; i < s.required.size(); ++i) {
        if (!(s.required[i - 1] < s.required[i])) {
          schema_fail(path, "required must be unique and sorted");
        }
      }
      for (const auto& r : s.required) {
        if (!s.property(r)) schema_fail(child(path, r), "required name is not a declared property");
      }
      for (const auto& p : s.properties) check_at(p.schema, child(path, p.name));
      break;
    }
    case Kind::union_of:
      if (s.arms.empty()) schema_fail(path, "union needs at least one arm");
      for (const auto& arm : s.arms) check_at(arm, path);
      break;
  }
}

}  // namespace

void check_schema(const Schema& schema) { check_at(schema, ""); }

bool is_union_free(const Schema& s) {
  if (s.kind == Kind::union_of) return false;
  for (const auto& i : s.items) {
    if (!is_union_free(i)) return false;
  }
  for (const auto& p : s.properties) {
    if (!is_union_free(p.schema)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Schema from_json_at(const Value& doc, const std::string& path) {
  if (!doc.is_object()) schema_fail(path, "schema must be a JSON object");
  static const std::set<std::string> kKeys = {"kind",  "min",      "max",        "enum",
                                              "items", "minLen",   "maxLen",     "properties",
                                              "required", "arms"};
  for (const auto& [key, _] : doc.items()) {
    if (!kKeys.count(key)) schema_fail(path, "unknown schema key \"" + key + "\"");
  }
  auto kind_it = doc.find("kind");
  if (kind_it == doc.end() || !kind_it->is_string()) schema_fail(path, "missing \"kind\"");
  const auto kind_name = kind_it->get<std::string>();

  Schema s;
  if (kind_name == "boolean") s.kind = Kind::boolean;
  else if (kind_name == "integer") s.kind = Kind::integer;
  else if (kind_name == "number") s.kind = Kind::number;
  else if (kind_name == "string") s.kind = Kind::string;
  else if (kind_name == "array") s.kind = Kind::array;
  else if (kind_name == "object") s.kind = Kind::object;
  else if (kind_name == "union") s.kind = Kind::union_of;
  else schema_fail(path, "unknown kind \"" + kind_name + "\"");

  auto read_number = [&](const char* key) -> std::optional<double> {
    auto it = doc.find(key);
    if (it == doc.end()) return std::nullopt;
    if (!it->is_number()) schema_fail(path, std::string(key) + " must be a number");
    return it->get<double>();
  };
  auto read_length = [&](const char* key) -> std::optional<std::uint64_t> {
    auto it = doc.find(key);
    if (it == doc.end()) return std::nullopt;
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
      schema_fail(path, std::string(key) + " must be a non-negative integer");
    }
    return it->get<std::uint64_t>();
  };

  s.minimum = read_number("min");
  s.maximum = read_number("max");
  s.min_len = read_length("minLen");
  s.max_len = read_length("maxLen");

  if (auto it = doc.find("enum"); it != doc.end()) {
    if (!it->is_array()) schema_fail(path, "enum must be an array of strings");
    std::vector<std::string> values;
    for (const auto& v : *it) {
      if (!v.is_string()) schema_fail(path, "enum must be an array of strings");
      values.push_back(v.get<std::string>());
    }
    s.enumeration = std::move(values);
  }
  if (auto it = doc.find("items"); it != doc.end()) {
    s.items.push_back(from_json_at(*it, path + "[]"));
  }
  if (auto it = doc.find("properties"); it != doc.end()) {
    if (!it->is_object()) schema_fail(path, "properties must be an object");
    for (const auto& [name, sub] : it->items()) {
      s.properties.push_back(Property{name, from_json_at(sub, child(path, name))});
    }
  }
  if (auto it = doc.find("required"); it != doc.end()) {
    if (!it->is_array()) schema_fail(path, "required must be an array of strings");
    for (const auto& v : *it) {
      if (!v.is_string()) schema_fail(path, "required must be an array of strings");
      s.required.push_back(v.get<std::string>());
    }
    std::sort(s.required.begin(), s.required.end());
    if (std::adjacent_find(s.required.begin(), s.required.end()) != s.required.end()) {
      schema_fail(path, "duplicate required name");
    }
  }
  if (auto it = doc.find("arms"); it != doc.end()) {
    if (!it->is_array()) schema_fail(path, "arms must be an array");
    for (const auto& arm : *it) s.arms.push_back(from_json_at(arm, path));
  }
  return s;
}

}  // namespace

Schema schema_from_json(const Value& doc) {
  Schema s = from_json_at(doc, "");
  check_schema(s);
  return s;
}

Value schema_to_json(const Schema& s) {
  Value out = Value::object();
  out["kind"] = std::string(to_string(s.kind));
  if (s.minimum) out["min"] = number_to_json(*s.minimum);
  if (s.maximum) out["max"] = number_to_json(*s.maximum);
  if (s.enumeration) out["enum"] = *s.enumeration;
  if (!s.items.empty()) out["items"] = schema_to_json(s.item());
  if (s.min_len) out["minLen"] = *s.min_len;
  if (s.max_len) out["maxLen"] = *s.max_len;
  if (s.kind == Kind::object) {
    Value props = Value::object();
    for (const auto& p : s.properties) props[p.name] = schema_to_json(p.schema);
    out["properties"] = std::move(props);
    out["required"] = s.required;
  }
  if (s.kind == Kind::union_of) {
    Value arms = Value::array();
    for (const auto& a : s.arms) arms.push_back(schema_to_json(a));
    out["arms"] = std::move(arms);
  }
  return out;
}

std::string describe(const Schema& s) {
  auto range = [&]() -> std::string {
    if (!s.minimum && !s.maximum) return "";
    return "[" + (s.minimum ? format_number(*s.minimum) : std::string("-inf")) + "," +
           (s.maximum ? format_number(*s.maximum) : std::string("inf")) + "]";
  };
  switch (s.kind) {
    case Kind::boolean: return "boolean";
    case Kind::integer: return "integer" + range();
    case Kind::number: return "number" + range();
    case Kind::string: {
      if (!s.enumeration) return "string";
      std::string out = "string{";
      for (std::size_t i = 0; i < s.enumeration->size(); ++i) {
        out += (i ? "," : "") + (*s.enumeration)[i];
      }
      return out + "}";
    }
    case Kind::array: return "array<" + describe(s.item()) + ">";
    case Kind::object: {
      std::string out = "object{";
      for (std::size_t i = 0; i < s.properties.size(); ++i) {
        out += (i ? "," : "") + s.properties[i].name + (s.is_required(s.properties[i].name) ? "" : "?");
      }
      return out + "}";
    }
    case Kind::union_of: {
      std::string out = "union(";
      for (std::size_t i = 0; i < s.arms.size(); ++i) out += (i ? "|" : "") + describe(s.arms[i]);
      return out + ")";
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Validation

std::vector<std::string> Validation::paths() const {
  std::vector<std::string> out;
  out.reserve(violations.size());
  for (const auto& v : violations) out.push_back(v.path);
  return out;
}

namespace {

void validate_at(const Value& v, const Schema& s, const std::string& path,
                 std::vector<Violation>& out) {
  auto fail = [&](std::string message) { out.push_back({shown(path), std::move(message)}); };
  switch (s.kind) {
    case Kind::boolean:
      if (!v.is_boolean()) fail("expected boolean");
      return;
    case Kind::integer: {
      if (!v.is_number_integer()) return fail("expected integer");
      if (v.is_number_unsigned() &&
          v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        return fail("integer out of the supported 64-bit range");
      }
      const auto x = v.get<std::int64_t>();
      if (s.minimum && x < static_cast<std::int64_t>(*s.minimum)) fail("below minimum");
      if (s.maximum && x > static_cast<std::int64_t>(*s.maximum)) fail("above maximum");
      return;
    }
    case Kind::number: {
      if (!v.is_number()) return fail("expected number");
      const auto x = v.get<double>();
      if (!std::isfinite(x)) return fail("number must be finite");
      if (s.minimum && x < *s.minimum) fail("below minimum");
      if (s.maximum && x > *s.maximum) fail("above maximum");
      return;
    }
    case Kind::string: {
      if (!v.is_string()) return fail("expected string");
      if (s.enumeration) {
        const auto& x = v.get_ref<const std::string&>();
        if (std::find(s.enumeration->begin(), s.enumeration->end(), x) == s.enumeration->end()) {
          fail("not one of the enumerated strings");
        }
      }
      return;
    }
    case Kind::array: {
      if (!v.is_array()) return fail("expected array");
      if (s.min_len && v.size() < *s.min_len) fail("shorter than minLen");
      if (s.max_len && v.size() > *s.max_len) fail("longer than maxLen");
      for (std::size_t i = 0; i < v.size(); ++i) {
        validate_at(v[i], s.item(), path + "[" + std::to_string(i) + "]", out);
      }
      return;
    }
    case Kind::object: {
      if (!v.is_object()) return fail("expected object");
      for (const auto& r : s.required) {
        if (!v.contains(r)) out.push_back({child(path, r), "missing required property"});
      }
      for (const auto& [key, item] : v.items()) {
        const Schema* ps = s.property(key);
        if (!ps) {
          out.push_back({child(path, key), "property not declared (closed object)"});
          continue;
        }
        validate_at(item, *ps, child(path, key), out);
      }
      return;
    }
    case Kind::union_of: {
      for (const auto& arm : s.arms) {
        std::vector<Violation> scratch;
        validate_at(v, arm, path, scratch);
        if (scratch.empty()) return;
      }
      fail("matches no union arm");
      return;
    }
  }
}

}  // namespace

Validation validate_value(const Value& value, const Schema& schema) {
  Validation result;
  validate_at(value, schema, "", result.violations);
  return result;
}

// ---------------------------------------------------------------------------
// Subtyping

namespace {

Compat incompatible(const std::string& path, std::string reason) {
  return Compat{false, shown(path), std::move(reason)};
}

bool range_within(const Schema& p, const Schema& c) {
  if (c.minimum && (!p.minimum || *p.minimum < *c.minimum)) return false;
  if (c.maximum && (!p.maximum || *p.maximum > *c.maximum)) return false;
  return true;
}

Compat subtype_at(const Schema& p, const Schema& c, const std::string& path) {
  if (p.kind == Kind::union_of) {
    for (const auto& arm : p.arms) {
      if (auto r = subtype_at(arm, c, path); !r) return r;
    }
    return {};
  }
  if (c.kind == Kind::union_of) {
    for (const auto& arm : c.arms) {
      if (subtype_at(p, arm, path)) return {};
    }
    return incompatible(path, "no union arm accepts " + describe(p));
  }

  auto mismatch = [&] {
    return incompatible(path, describe(p) + " is not accepted by " + describe(c));
  };

  switch (p.kind) {
    case Kind::boolean:
      return c.kind == Kind::boolean ? Compat{} : mismatch();
    case Kind::integer:
    case Kind::number:
      if (!(c.kind == Kind::number || (c.kind == Kind::integer && p.kind == Kind::integer))) {
        return mismatch();
      }
      return range_within(p, c) ? Compat{} : mismatch();
    case Kind::string:
      if (c.kind != Kind::string) return mismatch();
      if (c.enumeration) {
        if (!p.enumeration) return mismatch();
        for (const auto& v : *p.enumeration) {
          if (std::find(c.enumeration->begin(), c.enumeration->end(), v) == c.enumeration->end()) {
            return incompatible(path, "\"" + v + "\" is not accepted by " + describe(c));
          }
        }
      }
      return {};
    case Kind::array: {
      if (c.kind != Kind::array) return mismatch();
      const std::uint64_t p_min = p.min_len.value_or(0);
      if (c.min_len && p_min < *c.min_len) return incompatible(path, "producer arrays may be shorter");
      if (c.max_len && (!p.max_len || *p.max_len > *c.max_len)) {
        return incompatible(path, "producer arrays may be longer");
      }
      // Only the empty array is produced; item types never meet.
      if (p.max_len && *p.max_len == 0) return {};
      return subtype_at(p.item(), c.item(), path + "[]");
    }
    case Kind::object: {
      if (c.kind != Kind::object) return mismatch();
      for (const auto& r : c.required) {
        if (!p.is_required(r)) {
          return incompatible(child(path, r), "required by consumer but not always produced");
        }
      }
      for (const auto& prop : p.properties) {
        const Schema* cs = c.property(prop.name);
        if (!cs) return incompatible(child(path, prop.name), "not declared by consumer");
        if (auto r = subtype_at(prop.schema, *cs, child(path, prop.name)); !r) return r;
      }
      return {};
    }
    case Kind::union_of:
      break;
  }
  return mismatch();
}

}  // namespace

Compat is_subtype(const Schema& producer, const Schema& consumer) {
  return subtype_at(producer, consumer, "");
}

// ---------------------------------------------------------------------------
// Meet / join

namespace {

std::optional<double> tighter_min(std::optional<double> a, std::optional<double> b) {
  if (!a) return b;
  if (!b) return a;
  return std::max(*a, *b);
}

std::optional<double> tighter_max(std::optional<double> a, std::optional<double> b) {
  if (!a) return b;
  if (!b) return a;
  return std::min(*a, *b);
}

void push_arm(std::vector<Schema>& arms, const Schema& s) {
  if (s.kind == Kind::union_of) {
    for (const auto& a : s.arms) push_arm(arms, a);
    return;
  }
  if (std::find(arms.begin(), arms.end(), s) == arms.end()) arms.push_back(s);
}

}  // namespace

std::optional<Schema> meet(const Schema& a, const Schema& b) {
  if (a.kind == Kind::union_of || b.kind == Kind::union_of) {
    const Schema& u = a.kind == Kind::union_of ? a : b;
    const Schema& other = a.kind == Kind::union_of ? b : a;
    std::vector<Schema> arms;
    for (const auto& arm : u.arms) {
      if (auto m = meet(arm, other)) push_arm(arms, *m);
    }
    if (arms.empty()) return std::nullopt;
    if (arms.size() == 1) return arms.front();
    return Schema::any_of(std::move(arms));
  }

  const bool a_num = a.kind == Kind::integer || a.kind == Kind::number;
  const bool b_num = b.kind == Kind::integer || b.kind == Kind::number;
  if (a_num && b_num) {
    Schema s = (a.kind == Kind::integer || b.kind == Kind::integer) ? Schema::integer()
                                                                   : Schema::number();
    s.minimum = tighter_min(a.minimum, b.minimum);
    s.maximum = tighter_max(a.maximum, b.maximum);
    if (s.kind == Kind::integer) {
      if (s.minimum) s.minimum = std::ceil(*s.minimum);
      if (s.maximum) s.maximum = std::floor(*s.maximum);
    }
    if (s.minimum && s.maximum && *s.minimum > *s.maximum) return std::nullopt;
    return s;
  }
  if (a.kind != b.kind) return std::nullopt;

  switch (a.kind) {
    case Kind::boolean:
      return a;
    case Kind::string: {
      if (!a.enumeration) return b;
      if (!b.enumeration) return a;
      std::vector<std::string> common;
      for (const auto& v : *a.enumeration) {
        if (std::find(b.enumeration->begin(), b.enumeration->end(), v) != b.enumeration->end()) {
          common.push_back(v);
        }
      }
      if (common.empty()) return std::nullopt;
      return Schema::string_enum(std::move(common));
    }
    case Kind::array: {
      std::optional<std::uint64_t> lo;
      if (a.min_len || b.min_len) lo = std::max(a.min_len.value_or(0), b.min_len.value_or(0));
      std::optional<std::uint64_t> hi;
      if (a.max_len && b.max_len) hi = std::min(*a.max_len, *b.max_len);
      else hi = a.max_len ? a.max_len : b.max_len;
      if (lo && hi && *lo > *hi) return std::nullopt;
      if (auto item = meet(a.item(), b.item())) return Schema::array(*item, lo, hi);
      if (lo.value_or(0) > 0) return std::nullopt;
      return Schema::array(a.item(), lo, std::uint64_t{0});
    }
    case Kind::object: {
      std::vector<Property> props;
      std::vector<std::string> required;
      for (const auto& pa : a.properties) {
        const Schema* pb = b.property(pa.name);
        const bool needed = a.is_required(pa.name) || b.is_required(pa.name);
        if (!pb) {
          if (needed) return std::nullopt;
          continue;
        }
        auto m = meet(pa.schema, *pb);
        if (!m) {
          if (needed) return std::nullopt;
          continue;
        }
        props.push_back(Property{pa.name, std::move(*m)});
        if (needed) required.push_back(pa.name);
      }
      for (const auto& pb : b.properties) {
        if (!a.property(pb.name) && b.is_required(pb.name)) return std::nullopt;
      }
      return Schema::object(std::move(props), std::move(required));
    }
    default:
      break;
  }
  return std::nullopt;
}

Schema join(const Schema& a, const Schema& b) {
  if (is_subtype(a, b)) return b;
  if (is_subtype(b, a)) return a;
  std::vector<Schema> arms;
  push_arm(arms, a);
  push_arm(arms, b);
  return Schema::any_of(std::move(arms));
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

using Domain = std::optional<std::vector<Value>>;

Domain enumerate_at(const Schema& s, std::size_t budget) {
  switch (s.kind) {
    case Kind::boolean:
      if (budget < 2) return std::nullopt;
      return std::vector<Value>{true, false};
    case Kind::integer: {
      if (!s.minimum || !s.maximum) return std::nullopt;
      const auto lo = static_cast<std::int64_t>(*s.minimum);
      const auto hi = static_cast<std::int64_t>(*s.maximum);
      if (static_cast<std::uint64_t>(hi - lo) >= budget) return std::nullopt;
      std::vector<Value> out;
      for (std::int64_t x = lo; x <= hi; ++x) out.emplace_back(x);
      return out;
    }
    case Kind::number:
      return std::nullopt;
    case Kind::string: {
      if (!s.enumeration || s.enumeration->size() > budget) return std::nullopt;
      std::vector<Value> out;
      for (const auto& v : *s.enumeration) out.emplace_back(v);
      return out;
    }
    case Kind::array: {
      if (!s.max_len) return std::nullopt;
      const std::uint64_t lo = s.min_len.value_or(0);
      const std::uint64_t hi = *s.max_len;
      if (hi - lo >= budget) return std::nullopt;
      std::vector<Value> items;
      if (hi > 0) {
        auto d = enumerate_at(s.item(), budget);
        if (!d) return std::nullopt;
        items = std::move(*d);
      }
      std::vector<Value> out;
      // All sequences of each admissible length, shortest first.
      std::vector<Value> layer{Value::array()};
      for (std::uint64_t len = 0; len <= hi; ++len) {
        if (len >= lo) {
          if (out.size() + layer.size() > budget) return std::nullopt;
          out.insert(out.end(), layer.begin(), layer.end());
        }
        if (len == hi) break;
        if (layer.size() * items.size() > budget) return std::nullopt;
        std::vector<Value> next;
        next.reserve(layer.size() * items.size());
        for (const auto& prefix : layer) {
          for (const auto& x : items) {
            Value extended = prefix;
            extended.push_back(x);
            next.push_back(std::move(extended));
          }
        }
        layer = std::move(next);
      }
      return out;
    }
    case Kind::object: {
      std::vector<Value> out{Value::object()};
      for (const auto& p : s.properties) {
        auto d = enumerate_at(p.schema, budget);
        if (!d) return std::nullopt;
        const bool optional = !s.is_required(p.name);
        const std::size_t choices = d->size() + (optional ? 1 : 0);
        if (out.size() * choices > budget) return std::nullopt;
        std::vector<Value> next;
        next.reserve(out.size() * choices);
        for (const auto& partial : out) {
          if (optional) next.push_back(partial);
          for (const auto& x : *d) {
            Value extended = partial;
            extended[p.name] = x;
            next.push_back(std::move(extended));
          }
        }
        out = std::move(next);
      }
      return out;
    }
    case Kind::union_of: {
      std::vector<Value> out;
      for (const auto& arm : s.arms) {
        auto d = enumerate_at(arm, budget);
        if (!d) return std::nullopt;
        for (auto& x : *d) {
          if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(std::move(x));
        }
        if (out.size() > budget) return std::nullopt;
      }
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::vector<Value>> enumerate_values(const Schema& schema, std::size_t budget) {
  if (budget == 0) return std::nullopt;
  return enumerate_at(schema, budget);
}

// ---------------------------------------------------------------------------
// Profiles

namespace {

// Field path segments: `.name` or `[]`. The root is `.`.
std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  if (path == ".") return out;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path.compare(i, 2, "[]") == 0) {
      out.emplace_back("[]");
      i += 2;
    } else if (path[i] == '.') {
      std::size_t j = i + 1;
      while (j < path.size() && path[j] != '.' && path[j] != '[') ++j;
      if (j == i + 1) throw Error(Errc::schema_error, path, "empty path segment");
      out.push_back(path.substr(i + 1, j - i - 1));
      i = j;
    } else {
      throw Error(Errc::schema_error, path, "malformed field path");
    }
  }
  return out;
}

std::vector<const Schema*> resolve_field(const Schema& root, const std::string& path) {
  std::vector<const Schema*> current{&root};
  for (const auto& seg : split_path(path)) {
    std::vector<const Schema*> next;
    std::vector<const Schema*> flat;
    for (const Schema* s : current) {
      if (s->kind == Kind::union_of) {
        for (const auto& a : s->arms) flat.push_back(&a);
      } else {
        flat.push_back(s);
      }
    }
    for (const Schema* s : flat) {
      if (seg == "[]" && s->kind == Kind::array) next.push_back(&s->item());
      if (seg != "[]" && s->kind == Kind::object) {
        if (const Schema* p = s->property(seg)) next.push_back(p);
      }
    }
    if (next.empty()) throw Error(Errc::schema_error, path, "profile path not found in schema");
    current = std::move(next);
  }
  return current;
}

void check_range_against(const Schema& s, const FieldRange& r, const std::string& path) {
  if (s.kind == Kind::union_of) {
    for (const auto& arm : s.arms) check_range_against(arm, r, path);
    return;
  }
  if (r.minimum || r.maximum) {
    if (s.kind != Kind::integer && s.kind != Kind::number) {
      throw Error(Errc::schema_error, path, "numeric sub-range on a non-numeric field");
    }
    if (r.minimum && r.maximum && *r.minimum > *r.maximum) {
      throw Error(Errc::schema_error, path, "sub-range min > max");
    }
    if ((s.minimum && (!r.minimum || *r.minimum < *s.minimum)) ||
        (s.maximum && (!r.maximum || *r.maximum > *s.maximum))) {
      throw Error(Errc::schema_error, path, "sub-range exceeds the schema range " + describe(s));
    }
  }
  if (r.values) {
    if (s.kind != Kind::string) throw Error(Errc::schema_error, path, "enum subset on a non-string field");
    if (s.enumeration) {
      for (const auto& v : *r.values) {
        if (std::find(s.enumeration->begin(), s.enumeration->end(), v) == s.enumeration->end()) {
          throw Error(Errc::schema_error, path, "\"" + v + "\" is outside the schema enum");
        }
      }
    }
  }
}

}  // namespace

void check_profile(const Schema& schema, const ValueProfile& profile) {
  for (const auto& [path, range] : profile.ranges) {
    for (const Schema* s : resolve_field(schema, path)) check_range_against(*s, range, path);
  }
}

ValueProfile profile_from_json(const Value& doc) {
  if (!doc.is_object() || !doc.contains("name") || !doc["name"].is_string()) {
    throw Error(Errc::schema_error, "", "profile needs a string \"name\"");
  }
  ValueProfile p;
  p.name = doc["name"].get<std::string>();
  p.description = doc.value("description", "");
  if (auto it = doc.find("ranges"); it != doc.end()) {
    for (const auto& [path, r] : it->items()) {
      FieldRange fr;
      if (r.contains("min")) fr.minimum = r["min"].get<double>();
      if (r.contains("max")) fr.maximum = r["max"].get<double>();
      if (r.contains("values")) fr.values = r["values"].get<std::vector<std::string>>();
      p.ranges.emplace(path, std::move(fr));
    }
  }
  return p;
}

Value profile_to_json(const ValueProfile& p) {
  Value ranges = Value::object();
  for (const auto& [path, r] : p.ranges) {
    Value entry = Value::object();
    if (r.minimum) entry["min"] = number_to_json(*r.minimum);
    if (r.maximum) entry["max"] = number_to_json(*r.maximum);
    if (r.values) entry["values"] = *r.values;
    ranges[path] = std::move(entry);
  }
  return Value{{"name", p.name}, {"description", p.description}, {"ranges", std::move(ranges)}};
}

// ---------------------------------------------------------------------------
// Generation

namespace {

constexpr double kDefaultSpan = 2000.0;
constexpr std::uint64_t kDefaultExtraLength = 4;

struct NumericWindow {
  double lo;
  double hi;
};

NumericWindow default_window(std::optional<double> lo, std::optional<double> hi) {
  const double a = lo ? *lo : (hi ? *hi - kDefaultSpan / 2 : -kDefaultSpan / 2);
  const double b = hi ? *hi : a + kDefaultSpan;
  return {a, b};
}

const FieldRange* profiled(const ValueProfile* profile, const std::string& path) {
  if (!profile) return nullptr;
  auto it = profile->ranges.find(shown(path));
  return it == profile->ranges.end() ? nullptr : &it->second;
}

Value generate_at(const Schema& s, const ValueProfile* profile, Rng& rng, const std::string& path) {
  const FieldRange* range = profiled(profile, path);
  switch (s.kind) {
    case Kind::boolean:
      return rng.coin();
    case Kind::integer:
    case Kind::number: {
      auto lo = s.minimum;
      auto hi = s.maximum;
      if (range) {
        lo = tighter_min(lo, range->minimum);
        hi = tighter_max(hi, range->maximum);
      }
      if (s.kind == Kind::integer) {
        if (lo) lo = std::ceil(*lo);
        if (hi) hi = std::floor(*hi);
      }
      if (lo && hi && *lo > *hi) {
        throw Error(Errc::generation_error, shown(path), "profile range does not meet " + describe(s));
      }
      const auto w = default_window(lo, hi);
      if (s.kind == Kind::integer) {
        return rng.uniform_int(static_cast<std::int64_t>(w.lo), static_cast<std::int64_t>(w.hi));
      }
      return rng.uniform_real(w.lo, w.hi);
    }
    case Kind::string: {
      std::optional<std::vector<std::string>> choices = s.enumeration;
      if (range && range->values) {
        if (!choices) {
          choices = range->values;
        } else {
          std::vector<std::string> common;
          for (const auto& v : *choices) {
            if (std::find(range->values->begin(), range->values->end(), v) != range->values->end()) {
              common.push_back(v);
            }
          }
          choices = std::move(common);
        }
      }
      if (choices) {
        if (choices->empty()) {
          throw Error(Errc::generation_error, shown(path), "profile values do not meet the enum");
        }
        return (*choices)[rng.index(choices->size())];
      }
      static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz";
      const auto len = rng.index(9);
      std::string out;
      for (std::size_t i = 0; i < len; ++i) out.push_back(kAlphabet[rng.index(kAlphabet.size())]);
      return out;
    }
    case Kind::array: {
      const std::uint64_t lo = s.min_len.value_or(0);
      const std::uint64_t hi = s.max_len.value_or(lo + kDefaultExtraLength);
      const auto len = static_cast<std::uint64_t>(
          rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
      Value out = Value::array();
      for (std::uint64_t i = 0; i < len; ++i) {
        out.push_back(generate_at(s.item(), profile, rng, path + "[]"));
      }
      return out;
    }
    case Kind::object: {
      Value out = Value::object();
      for (const auto& p : s.properties) {
        if (!s.is_required(p.name) && !rng.coin()) continue;
        out[p.name] = generate_at(p.schema, profile, rng, child(path, p.name));
      }
      return out;
    }
    case Kind::union_of:
      return generate_at(s.arms[rng.index(s.arms.size())], profile, rng, path);
  }
  return nullptr;
}

}  // namespace

Value generate_value(const Schema& schema, const ValueProfile* profile, Rng& rng) {
  return generate_at(schema, profile, rng, "");
}

}  // namespace privflow
