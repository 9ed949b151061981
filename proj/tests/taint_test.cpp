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

#include "privflow/library.hpp"
#include "privflow/taint.hpp"
#include "support/flow_gen.hpp"
#include "support/taint_oracle.hpp"

using namespace privflow;
using namespace privflow::testing;

namespace {

const SpecRegistry& reg() {
  static const SpecRegistry r = builtin_specs();
  return r;
}

bool has(const PersonalLabel& l, Category c) {
  return std::any_of(l.begin(), l.end(), [&](const PersonalAtom& a) { return a.category == c; });
}

bool has_tag(const PersonalLabel& l, const std::string& tag) {
  return std::any_of(l.begin(), l.end(), [&](const PersonalAtom& a) { return a.tag == tag; });
}

std::set<std::string> tags(const PersonalLabel& l) {
  std::set<std::string> out;
  for (const auto& a : l) out.insert(a.tag);
  return out;
}

}  // namespace

TEST_CASE("node_transfer: the social feed emits a handle and opinions") {
  const auto& spec = reg().at("twitter");
  auto out = node_transfer(spec, Value{{"period_ms", 1000}, {"query", "x"}}, {});
  REQUIRE(out.size() == 1);
  CHECK(out.at("out") == PersonalLabel{PersonalAtom::primary(Category::identifier, "handle"),
                                       PersonalAtom::primary(Category::personal, "opinions")});
}

TEST_CASE("node_transfer: gait appears only at fine accelerometer granularity") {
  const auto& spec = reg().at("smartphone");
  auto coarse = node_transfer(spec, Value{{"sensor", "accelerometer"}, {"period_ms", 1000}}, {}).at("out");
  auto fine = node_transfer(spec, Value{{"sensor", "accelerometer"}, {"period_ms", 10}}, {}).at("out");
  CHECK(tags(coarse) == std::set<std::string>{"movement"});
  CHECK(tags(fine) == std::set<std::string>{"gait", "movement"});
  auto battery = node_transfer(spec, Value{{"sensor", "battery"}, {"period_ms", 10}}, {}).at("out");
  CHECK(tags(battery) == std::set<std::string>{"device-usage"});
}

TEST_CASE("node_transfer: social graph needs timestamps alongside the bluetooth scan") {
  const auto& spec = reg().at("smartphone");
  auto plain = node_transfer(spec, Value{{"sensor", "bluetooth-scan"}, {"period_ms", 1000}}, {}).at("out");
  CHECK(tags(plain) == std::set<std::string>{"device-address"});
  auto stamped =
      node_transfer(spec, Value{{"sensor", "bluetooth-scan"}, {"period_ms", 1000}, {"timestamps", true}}, {}).at("out");
  CHECK(tags(stamped) == std::set<std::string>{"device-address", "social-graph", "timestamp-series"});
}

TEST_CASE("node_transfer: clear and filter") {
  PersonalLabel input{PersonalAtom::primary(Category::identifier, "handle"),
                      PersonalAtom::primary(Category::personal, "opinions"),
                      PersonalAtom::primary(Category::sensitive, "health")};
  CHECK(node_transfer(reg().at("aggregate"), Value::object(), input).at("out").empty());
  const auto& extract = reg().at("extract");
  CHECK(node_transfer(extract, Value{{"fields", {"a"}}}, input).at("out") == input);
  auto redacted = node_transfer(extract, Value{{"fields", {"a"}}, {"drop", {"identifier", "health"}}}, input).at("out");
  CHECK(tags(redacted) == std::set<std::string>{"opinions"});
  CHECK(node_transfer(reg().at("function"), Value{{"body", "msg"}}, input).at("out") == input);
}

TEST_CASE("removing the social feed wire clears identifiers downstream") {
  auto flow = load_fixture("social", reg());
  auto before = propagate_labels(flow, reg());
  const std::set<std::string> downstream = {"combine", "export", "debug"};
  int identified = 0;
  for (const auto& [w, label] : before) {
    if (downstream.count(w.to.node) && w.from.node != "extract_a") {
      CHECK(has(label, Category::identifier));
      ++identified;
    }
  }
  CHECK(identified == 3);
  CHECK(badges(before.at(Wire{{"combine", "out"}, {"export", "in"}})) == "PI");

  auto r = apply_edit(flow, edit::RemoveWire{Wire{{"twitter", "out"}, {"extract_b", "in"}}}, reg());
  auto after = propagate_labels(r.flow, reg());
  for (const auto& [w, label] : after) CHECK_FALSE(has(label, Category::identifier));

  auto diff = diff_labels(before, after);
  for (const auto& w : {Wire{{"extract_b", "out"}, {"combine", "right"}}, Wire{{"combine", "out"}, {"export", "in"}},
                        Wire{{"combine", "out"}, {"debug", "in"}}}) {
    REQUIRE(diff.count(w));
    CHECK(has(diff.at(w).removed, Category::identifier));
    CHECK(diff.at(w).added.empty());
  }
  CHECK(diff.count(Wire{{"light", "out"}, {"extract_a", "in"}}) == 0);
  CHECK(diff_labels(before, before).empty());
}

TEST_CASE("raising the accelerometer rate adds gait downstream") {
  auto flow = load_fixture("home", reg());
  Value config = flow.nodes.at("phone").config;
  config["period_ms"] = 100;
  auto slow = apply_edit(flow, edit::ReconfigureNode{"phone", config}, reg()).flow;
  auto diff = diff_labels(propagate_labels(slow, reg()), propagate_labels(flow, reg()));
  CHECK(diff == diff_labels(naive_labels(slow, reg()), naive_labels(flow, reg())));
  const std::set<Wire> expected = {Wire{{"phone", "out"}, {"magnitude", "in"}},
                                   Wire{{"magnitude", "out"}, {"debug", "in"}},
                                   Wire{{"magnitude", "out"}, {"count", "in"}}};
  std::set<Wire> touched;
  for (const auto& [w, d] : diff) {
    touched.insert(w);
    CHECK(tags(d.added) == std::set<std::string>{"gait"});
    CHECK(d.removed.empty());
  }
  CHECK(touched == expected);
}

TEST_CASE("worklist fixpoint equals naive iteration on random graphs") {
  Rng rng(4242);
  int cyclic = 0;
  for (int i = 0; i < 300; ++i) {
    auto flow = random_flow(reg(), rng, static_cast<int>(rng.uniform_int(1, 8)),
                            static_cast<int>(rng.uniform_int(0, 12)));
    CHECK(propagate_labels(flow, reg()) == naive_labels(flow, reg()));
    cyclic += has_cycle(flow);
  }
  CHECK(cyclic > 30);
}

TEST_CASE("adding a wire never shrinks a label") {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    auto flow = random_flow(reg(), rng, 6, 6);
    auto before = propagate_labels(flow, reg());
    auto w = random_wire(flow, reg(), rng);
    if (!w || flow.wires.count(*w)) continue;
    flow.wires.insert(*w);
    auto after = propagate_labels(flow, reg());
    for (const auto& [wire, label] : before) {
      CHECK(std::includes(after.at(wire).begin(), after.at(wire).end(), label.begin(), label.end()));
    }
  }
}

TEST_CASE("secondary atoms appear exactly when their conditions hold") {
  for (std::int64_t period : {100, 1000, 10000, 60000}) {
    auto flow = load_fixture("chain", reg());
    flow.nodes.at("a").config["period_ms"] = period;
    auto labels = propagate_labels(flow, reg());
    for (const auto& [w, l] : labels) CHECK(has_tag(l, "presence") == (period <= 1000));
  }
}

TEST_CASE("a flow of label-clearing nodes carries nothing") {
  auto flow = make_flow(reg(),
                        {{"a", "aggregate", Value::object()}, {"b", "aggregate", Value::object()},
                         {"c", "aggregate", Value::object()}},
                        {"a.out->b.in", "b.out->c.in", "c.out->a.in"});
  for (const auto& [w, l] : propagate_labels(flow, reg())) CHECK(l.empty());
}

TEST_CASE("summaries") {
  auto home = load_fixture("home", reg());
  auto s = summarize_personal_data(home, reg(), propagate_labels(home, reg()));
  CHECK(s.exports.at("archive").empty());
  CHECK(tags(s.outputs.at("debug")) == std::set<std::string>{"gait", "movement"});
  CHECK(tags(s.outputs.at("lamp")) == std::set<std::string>{"presence"});

  auto social = load_fixture("social", reg());
  auto labels = propagate_labels(social, reg());
  auto t = summarize_personal_data(social, reg(), labels);
  CHECK(has(t.exports.at("export"), Category::identifier));
  CHECK(t.exports.at("export") == input_label(social, labels, "export"));
  PersonalLabel app;
  for (const auto& [id, l] : t.outputs) app.insert(l.begin(), l.end());
  CHECK(t.app == app);

  auto lonely = make_flow(reg(), {{"l", "light", {{"period_ms", 100}}}}, {});
  auto u = summarize_personal_data(lonely, reg(), propagate_labels(lonely, reg()));
  CHECK(u == PersonalSummary{});
  CHECK(tags(source_label(reg().at("light"), lonely.nodes.at("l"))) == std::set<std::string>{"presence"});
}

TEST_CASE("label maps round-trip through JSON") {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    auto flow = random_flow(reg(), rng, 6, 8);
    auto labels = propagate_labels(flow, reg());
    CHECK(labels_from_json(labels_to_json(labels)) == labels);
  }
  auto doc = labels_to_json(propagate_labels(load_fixture("social", reg()), reg()));
  CHECK(doc["wires"][0]["from"] == Value::array({"combine", "out"}));
  CHECK(doc["wires"][0]["atoms"][0]["cat"] == "identifier");
}
