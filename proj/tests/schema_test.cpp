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

#include <doctest.h>

#include "privflow/error.hpp"
#include "privflow/schema.hpp"
#include "support/schema_gen.hpp"

using namespace privflow;

namespace {

Schema lux_object() {
  return Schema::object({{"lux", Schema::number()}}, {"lux"});
}

Schema light_schema() {
  return Schema::object({{"lux", Schema::number(0, 130000)}, {"ts", Schema::number()}},
                        {"lux", "ts"});
}

// Brute-force containment: every producer value validates under the consumer.
bool contained_by_enumeration(const Schema& p, const Schema& c, std::size_t budget) {
  auto values = enumerate_values(p, budget);
  REQUIRE(values.has_value());
  for (const auto& v : *values) {
    if (!validate_value(v, c)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("validate_value accepts an office-lighting reading within the lux range") {
  CHECK(validate_value(410, Schema::number(0, 130000)).ok());
  CHECK_FALSE(validate_value(130001, Schema::number(0, 130000)).ok());
  CHECK_FALSE(validate_value("410", Schema::number(0, 130000)).ok());
}

TEST_CASE("validate_value reports violation paths") {
  auto missing = validate_value(Value::object(), lux_object());
  REQUIRE_FALSE(missing.ok());
  CHECK(missing.paths() == std::vector<std::string>{".lux"});

  auto extra = validate_value(Value{{"lux", 50}, {"extra", 1}}, lux_object());
  REQUIRE_FALSE(extra.ok());
  CHECK(extra.paths() == std::vector<std::string>{".extra"});

  auto nested = validate_value(Value::array({1, "x", 3}), Schema::array(Schema::integer()));
  CHECK(nested.paths() == std::vector<std::string>{"[1]"});

  CHECK(validate_value(true, Schema::integer()).paths() == std::vector<std::string>{"."});
}

TEST_CASE("integer schemas reject fractional numbers, number schemas accept integers") {
  CHECK_FALSE(validate_value(1.5, Schema::integer()).ok());
  CHECK(validate_value(2, Schema::number(0, 3)).ok());
}

TEST_CASE("malformed schemas are schema errors, not validation failures") {
  Schema inverted = Schema::number(5, 1);
  CHECK_THROWS_AS(check_schema(inverted), Error);
  try {
    check_schema(inverted);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::schema_error);
  }

  Schema bad_required = Schema::object({{"a", Schema::boolean()}}, {"b"});
  CHECK_THROWS_AS(check_schema(bad_required), Error);
  CHECK_THROWS_AS(check_schema(Schema::any_of({})), Error);
  CHECK_THROWS_AS(schema_from_json(Value{{"kind", "array"}, {"items", {{"kind", "integer"}}},
                                         {"minLen", 3}, {"maxLen", 1}}),
                  Error);
  CHECK_THROWS_AS(schema_from_json(Value{{"kind", "object"}, {"additionalProperties", true}}), Error);
  CHECK_THROWS_AS(schema_from_json(Value{{"kind", "integer"}, {"min", 0.5}}), Error);
  CHECK_THROWS_AS(schema_from_json(Value{{"kind", "string"}, {"enum", Value::array()}}), Error);
}

TEST_CASE("is_subtype examples") {
  CHECK(is_subtype(Schema::number(0, 130000), Schema::number()).compatible);

  Schema accel = Schema::object(
      {{"x", Schema::number()}, {"y", Schema::number()}, {"z", Schema::number()}}, {"x", "y", "z"});
  auto r = is_subtype(accel, lux_object());
  CHECK_FALSE(r.compatible);
  CHECK(r.path == ".lux");

  CHECK(is_subtype(Schema::string_enum({"on", "off"}), Schema::string()).compatible);
  CHECK_FALSE(is_subtype(Schema::string(), Schema::string_enum({"on", "off"})).compatible);
  CHECK(is_subtype(Schema::integer(0, 3), Schema::number(0, 3)).compatible);
  CHECK_FALSE(is_subtype(Schema::number(0, 3), Schema::integer(0, 3)).compatible);
}

TEST_CASE("union producer: brute-force oracle over all 17 producer values") {
  Schema producer = Schema::any_of({Schema::integer(0, 5), Schema::integer(10, 20)});
  Schema consumer = Schema::integer(0, 20);
  auto values = enumerate_values(producer, 1000);
  REQUIRE(values);
  CHECK(values->size() == 17);
  CHECK(contained_by_enumeration(producer, consumer, 1000));
  CHECK(is_subtype(producer, consumer).compatible);
  CHECK_FALSE(is_subtype(producer, Schema::integer(0, 19)).compatible);
}

TEST_CASE("union consumer is checked per arm (sound, incomplete)") {
  // integer[0,5] fits inside no single arm of integer[0,2] | integer[3,5],
  // although every value is accepted by some arm. Conservative rejection.
  Schema p = Schema::integer(0, 5);
  Schema c = Schema::any_of({Schema::integer(0, 2), Schema::integer(3, 5)});
  CHECK(contained_by_enumeration(p, c, 100));
  CHECK_FALSE(is_subtype(p, c).compatible);
  CHECK(is_subtype(Schema::integer(1, 2), c).compatible);
}

TEST_CASE("empty-array producers are compatible regardless of item type") {
  Schema p = Schema::array(Schema::boolean(), std::nullopt, std::uint64_t{0});
  CHECK(is_subtype(p, Schema::array(Schema::string())).compatible);
  CHECK_FALSE(is_subtype(Schema::array(Schema::boolean()), Schema::array(Schema::string())).compatible);
}

TEST_CASE("object subtyping is closed-world") {
  Schema p = Schema::object({{"a", Schema::integer(0, 1)}}, {"a"});
  Schema wider = Schema::object({{"a", Schema::number()}, {"b", Schema::boolean()}}, {"a"});
  CHECK(is_subtype(p, wider).compatible);
  auto extra = is_subtype(wider, p);
  CHECK_FALSE(extra.compatible);
  CHECK(extra.path == ".a");  // number is not within integer[0,1]
  Schema optional_a = Schema::object({{"a", Schema::integer(0, 1)}}, {});
  CHECK_FALSE(is_subtype(optional_a, p).compatible);
  CHECK(is_subtype(p, optional_a).compatible);
}

TEST_CASE("enumerate_values") {
  auto b = enumerate_values(Schema::boolean(), 10);
  REQUIRE(b);
  CHECK(*b == std::vector<Value>{true, false});

  auto i = enumerate_values(Schema::integer(0, 3), 10);
  REQUIRE(i);
  CHECK(*i == std::vector<Value>{0, 1, 2, 3});

  Schema obj = Schema::object({{"a", Schema::boolean()}, {"b", Schema::string_enum({"x", "y"})}},
                              {"a", "b"});
  auto o = enumerate_values(obj, 100);
  REQUIRE(o);
  CHECK(o->size() == 4);

  CHECK_FALSE(enumerate_values(Schema::integer(0, 3), 3));
  CHECK_FALSE(enumerate_values(Schema::integer(0), 1000));
  CHECK_FALSE(enumerate_values(Schema::number(0, 1), 1000));
  CHECK_FALSE(enumerate_values(Schema::string(), 1000));

  // Optional properties add an "absent" choice: 1 + 2 values.
  Schema opt = Schema::object({{"a", Schema::boolean()}}, {});
  auto oo = enumerate_values(opt, 100);
  REQUIRE(oo);
  CHECK(oo->size() == 3);

  // Lengths 0..2 over a 2-value item domain: 1 + 2 + 4.
  auto arr = enumerate_values(Schema::array(Schema::boolean(), std::nullopt, std::uint64_t{2}), 100);
  REQUIRE(arr);
  CHECK(arr->size() == 7);
}

TEST_CASE("schema JSON round-trip is canonical") {
  Value doc = {{"kind", "object"},
               {"properties",
                {{"lux", {{"kind", "number"}, {"min", 0}, {"max", 130000}}},
                 {"tags", {{"kind", "array"}, {"items", {{"kind", "string"}, {"enum", {"a", "b"}}}},
                           {"minLen", 1}}},
                 {"v", {{"kind", "union"}, {"arms", {{{"kind", "boolean"}}, {{"kind", "integer"}}}}}}}},
               {"required", {"lux"}}};
  Schema s = schema_from_json(doc);
  CHECK(schema_to_json(s) == doc);
  CHECK(schema_to_json(s).dump() == doc.dump());
  CHECK(schema_from_json(schema_to_json(s)) == s);
}

TEST_CASE("generate_value with the office-lighting profile stays within 320-500 lux") {
  ValueProfile office{"office lighting", "Office lighting", {{".lux", FieldRange{320, 500, {}}}}};
  check_profile(light_schema(), office);
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    Value v = generate_value(light_schema(), &office, rng);
    REQUIRE(validate_value(v, light_schema()).ok());
    CHECK(v["lux"].get<double>() >= 320);
    CHECK(v["lux"].get<double>() <= 500);
  }
}

TEST_CASE("generate_value centres the overcast-day profile on 1000 lux") {
  ValueProfile overcast{"overcast day", "", {{".lux", FieldRange{900, 1100, {}}}}};
  Rng rng(11);
  double sum = 0;
  for (int i = 0; i < 1000; ++i) sum += generate_value(light_schema(), &overcast, rng)["lux"].get<double>();
  CHECK(sum / 1000 == doctest::Approx(1000).epsilon(0.02));
}

TEST_CASE("generate_value is deterministic per seed") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 20; ++i) CHECK(generate_value(Schema::boolean(), nullptr, a) ==
                                     generate_value(Schema::boolean(), nullptr, b));
}

TEST_CASE("profiles outside the schema range are rejected; empty intersections fail generation") {
  ValueProfile too_bright{"too bright", "", {{".lux", FieldRange{100000, 200000, {}}}}};
  CHECK_THROWS_AS(check_profile(light_schema(), too_bright), Error);
  ValueProfile unknown{"unknown", "", {{".nope", FieldRange{0, 1, {}}}}};
  CHECK_THROWS_AS(check_profile(light_schema(), unknown), Error);

  ValueProfile disjoint{"disjoint", "", {{".", FieldRange{10, 20, {}}}}};
  Rng rng(1);
  try {
    generate_value(Schema::integer(0, 5), &disjoint, rng);
    FAIL("expected generation error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::generation_error);
  }
}

TEST_CASE("meet is exact on enumerable schemas") {
  testing::SchemaGenOptions opt;
  opt.allow_numbers = false;
  Rng rng(5);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    Schema a = testing::random_schema(rng, opt);
    Schema b = testing::perturb(a, rng, opt);
    auto da = enumerate_values(a, 2000);
    auto db = enumerate_values(b, 2000);
    if (!da || !db) continue;
    auto m = meet(a, b);
    std::size_t both = 0;
    for (const auto& v : *da) both += validate_value(v, b).ok() ? 1 : 0;
    if (!m) {
      CHECK(both == 0);
      continue;
    }
    check_schema(*m);
    auto dm = enumerate_values(*m, 4000);
    REQUIRE(dm);
    for (const auto& v : *dm) {
      CHECK(validate_value(v, a).ok());
      CHECK(validate_value(v, b).ok());
    }
    CHECK(dm->size() == both);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("is_subtype is reflexive and transitive on union-free schemas") {
  testing::SchemaGenOptions opt;
  opt.allow_unions = false;
  Rng rng(99);
  int chains = 0;
  for (int i = 0; i < 600; ++i) {
    Schema a = testing::random_schema(rng, opt);
    CHECK(is_subtype(a, a).compatible);
    Schema b = testing::perturb(a, rng, opt);
    Schema c = testing::perturb(b, rng, opt);
    if (is_subtype(a, b) && is_subtype(b, c)) {
      CHECK(is_subtype(a, c).compatible);
      ++chains;
    }
  }
  CHECK(chains > 20);
}

TEST_CASE("generated values always validate; join accepts both sides") {
  testing::SchemaGenOptions opt;
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    Schema s = testing::random_schema(rng, opt);
    check_schema(s);
    for (int k = 0; k < 20; ++k) CHECK(validate_value(generate_value(s, nullptr, rng), s).ok());
    Schema t = testing::perturb(s, rng, opt);
    Schema j = join(s, t);
    CHECK(is_subtype(s, j).compatible);
    CHECK(is_subtype(t, j).compatible);
  }
}
