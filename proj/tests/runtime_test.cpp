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
#include "privflow/runtime.hpp"
#include "support/flow_gen.hpp"
#include "support/runtime_gen.hpp"

using namespace privflow;
using namespace privflow::testing;

namespace {

using RecKind = ProvenanceRecord::Kind;

const SpecRegistry& reg() {
  static const SpecRegistry r = builtin_specs();
  return r;
}

RunOptions opts(std::uint64_t seed, std::int64_t duration, std::map<std::string, std::string> profiles = {}) {
  RunOptions o;
  o.seed = seed;
  o.duration_ms = duration;
  o.profiles = std::move(profiles);
  return o;
}

std::vector<ProvenanceRecord> records(const std::vector<ProvenanceRecord>& log, RecKind kind, const std::string& node) {
  std::vector<ProvenanceRecord> out;
  for (const auto& r : log) {
    if (r.kind == kind && r.node == node) out.push_back(r);
  }
  return out;
}

std::set<std::int64_t> tick_times(const std::vector<ProvenanceRecord>& log, const std::string& node) {
  std::set<std::int64_t> out;
  for (const auto& r : records(log, RecKind::emit, node)) out.insert(r.t);
  return out;
}

}  // namespace

TEST_CASE("a datasource with period p ticks floor(duration / p) times") {
  auto flow = load_fixture("chain", reg());
  flow.nodes.at("a").config["period_ms"] = 100;
  auto r = start_session(flow, reg(), opts(1, 1000));
  auto emits = records(r.log, RecKind::emit, "a");
  REQUIRE(emits.size() == 10);
  for (std::size_t i = 0; i < emits.size(); ++i) CHECK(emits[i].t == static_cast<std::int64_t>(100 * (i + 1)));
  CHECK(r.outputs.at("c").size() == 10);

  for (std::int64_t duration : {0, 99, 100, 101, 999, 1000, 1001, 2550}) {
    for (std::int64_t period : {100, 1000, 10000}) {
      flow.nodes.at("a").config["period_ms"] = period;
      auto times = tick_times(start_session(flow, reg(), opts(3, duration)).log, "a");
      CHECK(times.size() == static_cast<std::size_t>(duration / period));
      if (!times.empty()) CHECK(*times.rbegin() <= duration);
    }
  }
}

TEST_CASE("office lighting never crosses the overcast threshold") {
  auto flow = load_fixture("threshold", reg());
  auto office = start_session(flow, reg(), opts(7, 1000, {{"light", "office lighting"}}));
  CHECK(records(office.log, RecKind::emit, "light").size() == 10);
  CHECK(office.firings.at("trigger") == 0);
  for (const auto& r : records(office.log, RecKind::emit, "light")) {
    CHECK(r.payload["lux"].get<double>() >= 320);
    CHECK(r.payload["lux"].get<double>() <= 500);
  }
  auto overcast = start_session(flow, reg(), opts(7, 1000, {{"light", "overcast day"}}));
  CHECK(overcast.firings.at("trigger") > 0);
  // A steady level above the threshold fires once and stays on.
  auto daylight = start_session(flow, reg(), opts(7, 1000, {{"light", "full daylight"}}));
  CHECK(daylight.firings.at("trigger") == 1);
  CHECK(daylight.outputs.at("debug") == std::vector<Value>{true});
}

TEST_CASE("the same inputs give byte-identical logs") {
  for (const auto& name : fixture_flows()) {
    if (name == "miswire") continue;
    CAPTURE(name);
    auto flow = load_fixture(name, reg());
    const auto first = log_to_jsonl(start_session(flow, reg(), opts(42, 3000)).log);
    CHECK(log_to_jsonl(replay(flow, reg(), opts(42, 3000)).log) == first);
    auto other = start_session(flow, reg(), opts(43, 3000)).log;
    auto base = parse_jsonl(first);
    REQUIRE(other.size() == base.size());
    bool payloads_differ = false;
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(other[i].t == base[i].t);
      CHECK(other[i].node == base[i].node);
      CHECK(other[i].kind == base[i].kind);
      payloads_differ = payloads_differ || other[i].payload != base[i].payload;
    }
    CHECK(payloads_differ);
  }
  CHECK(start_session(load_fixture("social", reg()), reg(), opts(1, 0)).log.empty());
}

TEST_CASE("lineage: chain and fan-in") {
  auto chain = start_session(load_fixture("chain", reg()), reg(), opts(5, 1000));
  auto consumed = records(chain.log, RecKind::consume, "c");
  REQUIRE(consumed.size() == 1);
  auto tree = lineage(chain.log, consumed[0].msg);
  CHECK(tree.record.node == "b");
  REQUIRE(tree.parents.size() == 1);
  CHECK(tree.parents[0].record.node == "a");
  CHECK(tree.parents[0].parents.empty());

  auto social = start_session(load_fixture("social", reg()), reg(), opts(5, 2000));
  auto exported = records(social.log, RecKind::consume, "export");
  REQUIRE_FALSE(exported.empty());
  auto merged = lineage(social.log, exported.back().msg);
  std::set<std::string> leaves;
  std::function<void(const LineageNode&)> walk = [&](const LineageNode& n) {
    if (n.parents.empty()) leaves.insert(n.record.node);
    for (const auto& p : n.parents) walk(p);
  };
  walk(merged);
  CHECK(leaves == std::set<std::string>{"light", "twitter"});
  CHECK_THROWS_AS(lineage(social.log, "5:999999"), Error);
}

TEST_CASE("random runnable flows: conformance, causality and lineage") {
  Rng rng(2024);
  int sessions = 0;
  for (int i = 0; i < 120; ++i) {
    auto flow = random_runnable_flow(reg(), rng);
    REQUIRE_FALSE(has_errors(check_flow(flow, reg())));
    auto r = start_session(flow, reg(), opts(i, 2000));
    ++sessions;
    const auto typing = type_flow(flow, reg());
    std::set<std::string> seen;
    for (const auto& rec : r.log) {
      if (rec.kind != RecKind::emit) continue;
      const Schema* s = typing.find(rec.node, rec.port, Direction::out);
      REQUIRE(s != nullptr);
      CHECK(validate_value(rec.payload, *s).ok());
      const bool source = reg().at(flow.nodes.at(rec.node).spec).role == Role::datasource;
      CHECK(rec.parents.empty() == source);
      for (const auto& p : rec.parents) CHECK(seen.count(p));
      seen.insert(rec.msg);
    }
    for (const auto& rec : r.log) {
      if (rec.kind != RecKind::consume) continue;
      CHECK(seen.count(rec.msg));
      if (reg().at(flow.nodes.at(rec.node).spec).role == Role::output) {
        CHECK(lineage_reaches_sources(r.log, flow, reg(), rec.msg));
        CHECK_NOTHROW(lineage(r.log, rec.msg));
      }
    }
  }
  CHECK(sessions == 120);
}

TEST_CASE("windows partition the node's records") {
  auto r = start_session(load_fixture("home", reg()), reg(), opts(9, 2000));
  for (const auto& node : {"light", "dim", "lamp", "magnitude", "archive"}) {
    CAPTURE(node);
    std::vector<ProvenanceRecord> all;
    for (const auto& rec : r.log) {
      if (rec.node == node) all.push_back(rec);
    }
    CHECK(window(r.log, node, 0, 2000) == all);
    CHECK(window(r.log, node, 0, 2000) == window(r.log, node, 0, 2000));
    for (std::int64_t step : {1, 7, 250, 999}) {
      std::vector<ProvenanceRecord> joined;
      for (std::int64_t from = 0; from <= 2000; from += step) {
        auto part = window(r.log, node, from, std::min<std::int64_t>(from + step - 1, 2000));
        joined.insert(joined.end(), part.begin(), part.end());
      }
      CHECK(joined == all);
    }
  }
  CHECK(window(r.log, "light", 1500, 1500).empty());
  CHECK_THROWS_AS(window(r.log, "nobody", 0, 10), Error);
  CHECK_THROWS_AS(window(r.log, "light", 10, 0), Error);
}

TEST_CASE("node faults are logged and the session continues") {
  auto flow = make_flow(reg(),
                        {{"l", "light", {{"period_ms", 100}}},
                         {"f", "function", {{"body", "{q: msg.lux / 0}"}}},
                         {"d", "debug", Value::object()}},
                        {"l.out->f.in", "f.out->d.in"});
  auto r = start_session(flow, reg(), opts(1, 500));
  auto faults = records(r.log, RecKind::fault, "f");
  CHECK(faults.size() == 5);
  CHECK(r.faults == 5);
  CHECK(faults[0].payload["error"] == "division-by-zero");
  CHECK(records(r.log, RecKind::emit, "l").size() == 5);
  CHECK(r.outputs.at("d").empty());
}

TEST_CASE("a zero-delay loop hits the per-instant limit") {
  auto flow = make_flow(reg(), {{"l", "light", {{"period_ms", 1000}}}, {"a", "aggregate", Value::object()}},
                        {"l.out->a.in", "a.out->a.in"});
  REQUIRE_FALSE(has_errors(check_flow(flow, reg())));
  auto o = opts(1, 2000);
  o.instant_limit = 50;
  auto r = start_session(flow, reg(), o);
  auto faults = records(r.log, RecKind::fault, "a");
  REQUIRE(faults.size() == 2);
  CHECK(faults[0].payload["error"] == "loop-limit");
  CHECK(faults[0].t == 1000);
  CHECK(faults[1].t == 2000);
}

TEST_CASE("refusals") {
  try {
    Session s(load_fixture("miswire", reg()), reg(), opts(1, 1000));
    FAIL("expected refuse-to-run");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::refuse_to_run);
  }
  auto flow = load_fixture("threshold", reg());
  CHECK_THROWS_AS(Session(flow, reg(), opts(1, 1000, {{"light", "noon on mars"}})), Error);
  CHECK_THROWS_AS(Session(flow, reg(), opts(1, 1000, {{"ghost", "office lighting"}})), Error);
  CHECK_THROWS_AS(Session(flow, reg(), opts(1, 1000, {{"trigger", "office lighting"}})), Error);
}

TEST_CASE("stepping and stopping early yields a prefix of the full log") {
  auto flow = load_fixture("social", reg());
  const auto full = start_session(flow, reg(), opts(11, 5000)).log;
  for (std::size_t steps : {0, 1, 5, 17, 40}) {
    Session s(flow, reg(), opts(11, 5000));
    for (std::size_t i = 0; i < steps && !s.done(); ++i) s.step();
    const auto& part = s.log();
    REQUIRE(part.size() <= full.size());
    CHECK(std::equal(part.begin(), part.end(), full.begin()));
  }
}

TEST_CASE("JSON Lines round-trip") {
  auto r = start_session(load_fixture("home", reg()), reg(), opts(3, 1000));
  auto text = log_to_jsonl(r.log);
  CHECK(parse_jsonl(text) == r.log);
  CHECK(text.substr(0, 9) == "{\"kind\":\"");
  const auto first = text.substr(0, text.find('\n'));
  CHECK(first.find("\"kind\"") < first.find("\"msg\""));
  CHECK(first.find("\"payload\"") < first.find("\"parents\""));
  try {
    parse_jsonl(text + "{\"kind\": \"emit\"}\n");
    FAIL("expected parse-error");
  } catch (const Error& e) {
    CHECK(e.location() == "line " + std::to_string(r.log.size() + 1));
  }
  auto summary = run_summary_to_json(r);
  CHECK(summary["records"] == r.log.size());
}

TEST_CASE("static labels cover what reaches each output at run time") {
  for (const auto& name : fixture_flows()) {
    if (name == "miswire") continue;
    CAPTURE(name);
    auto flow = load_fixture(name, reg());
    auto labels = propagate_labels(flow, reg());
    auto r = start_session(flow, reg(), opts(8, 3000));
    std::map<std::string, PersonalLabel> memo;
    for (const auto& rec : r.log) {
      if (rec.kind != RecKind::consume) continue;
      if (reg().at(flow.nodes.at(rec.node).spec).role != Role::output) continue;
      auto dynamic = runtime_label(r.log, flow, reg(), rec.msg, memo);
      auto stat = input_label(flow, labels, rec.node);
      CHECK(std::includes(stat.begin(), stat.end(), dynamic.begin(), dynamic.end()));
    }
  }
}
