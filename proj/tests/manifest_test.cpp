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

#include <functional>

#include "privflow/error.hpp"
#include "privflow/library.hpp"
#include "privflow/manifest.hpp"
#include "support/flow_gen.hpp"
#include "support/taint_oracle.hpp"

using namespace privflow;
using namespace privflow::testing;

namespace {

const SpecRegistry& reg() {
  static const SpecRegistry r = builtin_specs();
  return r;
}

ManifestMeta complete_meta() {
  return meta_from_json(Value::parse(read_file(std::string(PRIVFLOW_FIXTURE_DIR) + "/battery.meta.json")));
}

Manifest manifest_for(const FlowGraph& flow, const ManifestMeta& meta = complete_meta()) {
  auto labels = propagate_labels(flow, reg());
  auto risk = assess_risk(flow, reg(), labels, check_flow(flow, reg()));
  return build_manifest(flow, reg(), labels, risk, meta);
}

std::set<std::string> ids_with(const FlowGraph& flow, const std::function<bool(const NodeSpec&)>& pred) {
  std::set<std::string> out;
  for (const auto& [id, n] : flow.nodes) {
    if (pred(reg().at(n.spec))) out.insert(id);
  }
  return out;
}

template <typename Entries>
std::set<std::string> ids_of(const Entries& entries) {
  std::set<std::string> out;
  for (const auto& e : entries) out.insert(e.node);
  return out;
}

void check_mirror(const FlowGraph& flow, const Manifest& m) {
  CHECK(ids_of(m.datasources) == ids_with(flow, [](const NodeSpec& s) { return s.role == Role::datasource; }));
  CHECK(ids_of(m.outputs) == ids_with(flow, [](const NodeSpec& s) { return s.role == Role::output; }));
  CHECK(ids_of(m.exports) == ids_with(flow, [](const NodeSpec& s) { return s.risk.exports_off_box.has_value(); }));
  CHECK(ids_of(m.actuations) ==
        ids_with(flow, [](const NodeSpec& s) { return s.risk.physical_actuation.has_value(); }));
}

}  // namespace

TEST_CASE("battery chart manifest") {
  auto flow = load_fixture("battery", reg());
  auto m = manifest_for(flow);
  REQUIRE(m.datasources.size() == 1);
  CHECK(m.datasources[0].spec == "smartphone");
  CHECK(m.datasources[0].period_ms == 1000);
  CHECK(m.datasources[0].period_options == std::vector<std::int64_t>{10, 20, 100, 1000, 60000});
  CHECK(m.datasources[0].purpose == "Battery level is plotted on the local display only.");
  REQUIRE(m.outputs.size() == 1);
  CHECK(m.outputs[0].node == "display");
  CHECK(m.exports.empty());
  CHECK(m.actuations.empty());
  CHECK(m.app.name == "Battery chart");
  CHECK(m.app.author == "Example Developer");
  CHECK(m.layers.summary == "Battery chart reads 1 data source(s), sends data off-box: no, risk: low.");
  CHECK(m.layers.detail.find("Retention: Readings are kept in memory") != std::string::npos);
}

TEST_CASE("missing statutory fields are listed") {
  auto flow = load_fixture("battery", reg());
  auto meta = complete_meta();
  meta.statutory.retention.clear();
  try {
    manifest_for(flow, meta);
    FAIL("expected missing-statutory-field");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_statutory_field);
    CHECK(std::string(e.what()).find("retention") != std::string::npos);
    CHECK(std::string(e.what()).find("rights") == std::string::npos);
  }
  meta.statutory = {};
  CHECK(missing_statutory_fields(meta.statutory) ==
        std::vector<std::string>{"controller", "purpose", "retention", "rights"});
}

TEST_CASE("the export downstream of the social feed carries identifiers") {
  auto flow = load_fixture("social", reg());
  auto m = manifest_for(flow);
  REQUIRE(m.exports.size() == 1);
  CHECK(m.exports[0].off_box);
  CHECK(m.exports[0].destination == "cloud");
  // Independent recomputation: union of the naive-fixpoint labels entering the node.
  const auto naive = naive_labels(flow, reg());
  PersonalLabel expected;
  for (const auto& w : flow.wires) {
    if (w.to.node == "export") expected.insert(naive.at(w).begin(), naive.at(w).end());
  }
  CHECK(m.exports[0].atoms == expected);
  CHECK(std::any_of(expected.begin(), expected.end(),
                    [](const PersonalAtom& a) { return a.category == Category::identifier; }));
  CHECK(m.layers.summary.find("sends data off-box: yes, risk: high.") != std::string::npos);
}

TEST_CASE("manifests mirror the flow and agree with the analyses") {
  for (const char* name : {"battery", "social", "home", "chain", "threshold", "miswire"}) {
    CAPTURE(name);
    auto flow = load_fixture(name, reg());
    auto labels = propagate_labels(flow, reg());
    auto risk = assess_risk(flow, reg(), labels, check_flow(flow, reg()));
    auto m = build_manifest(flow, reg(), labels, risk, complete_meta());
    check_mirror(flow, m);
    CHECK(m.risk == risk);
    auto summary = summarize_personal_data(flow, reg(), labels);
    for (const auto& o : m.outputs) CHECK(o.atoms == summary.outputs.at(o.node));
    for (const auto& e : m.exports) CHECK(e.atoms == summary.exports.at(e.node));
    auto bytes = serialize_manifest(m);
    CHECK(parse_manifest(bytes) == m);
    CHECK(serialize_manifest(parse_manifest(bytes)) == bytes);
  }
}

TEST_CASE("random flows mirror and round-trip") {
  Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    auto flow = random_flow(reg(), rng, 8, 10);
    auto m = manifest_for(flow);
    check_mirror(flow, m);
    auto bytes = serialize_manifest(m);
    CHECK(serialize_manifest(parse_manifest(bytes)) == bytes);
  }
}

TEST_CASE("serialization is canonical") {
  auto m = manifest_for(load_fixture("battery", reg()));
  auto bytes = serialize_manifest(m);
  CHECK(bytes.find('\r') == std::string::npos);
  CHECK(bytes.back() == '\n');
  CHECK(bytes.rfind("{\n  \"app\": {\n    \"id\": \"battery\"", 0) == 0);
  std::vector<std::string> order;
  const auto doc = manifest_to_json(m);
  for (const auto& [k, v] : doc.items()) order.push_back(k);
  CHECK(order == std::vector<std::string>{"app", "description", "benefits", "datasources", "outputs", "exports",
                                          "actuations", "risk", "statutory", "layers"});
}

TEST_CASE("the battery chart manifest matches its frozen golden file") {
  auto bytes = serialize_manifest(manifest_for(load_fixture("battery", reg())));
  CHECK(bytes == read_file(std::string(PRIVFLOW_FIXTURE_DIR) + "/battery.manifest.golden.json"));
}

TEST_CASE("malformed manifests are rejected with a location") {
  auto bytes = serialize_manifest(manifest_for(load_fixture("battery", reg())));
  try {
    parse_manifest(bytes.substr(0, bytes.size() / 2));
    FAIL("expected parse-error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_error);
    CHECK(e.location().rfind("byte ", 0) == 0);
  }
  auto doc = Value::parse(bytes);
  doc["datasources"][0].erase("spec");
  try {
    manifest_from_json(doc);
    FAIL("expected parse-error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_error);
    CHECK(e.location() == "datasources[0].spec");
  }
  doc = Value::parse(bytes);
  doc["statutory"]["rights"] = "";
  CHECK_THROWS_AS(manifest_from_json(doc), Error);
  CHECK_THROWS_AS(meta_from_json(Value{{"benefit", "typo"}}), Error);
}
