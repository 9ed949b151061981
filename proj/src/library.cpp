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

#include "privflow/library.hpp"

namespace privflow {

namespace {

constexpr double kMaxPeriod = 3600000;

Schema period_schema() { return Schema::integer(1, kMaxPeriod); }

Schema string_pairs() { return Schema::array(Schema::array(Schema::string(), 2, 2)); }

Schema light_reading() {
  return Schema::object({{"lux", Schema::number(0, 130000)}, {"ts", Schema::number()}}, {"lux", "ts"});
}

Schema xyz() {
  return Schema::object({{"x", Schema::number()}, {"y", Schema::number()}, {"z", Schema::number()}},
                        {"x", "y", "z"});
}

// Cases shared by the chart processor and the chart-data output.
std::map<std::string, Schema> chart_inputs() {
  return {
      {"scalar", Schema::number()},
      {"light", Schema::object({{"lux", Schema::number()}, {"ts", Schema::number()}}, {"lux"})},
      {"xyz", xyz()},
      {"pairs", string_pairs()},
  };
}

Schema chart_config() {
  return Schema::object(
      {{"input", Schema::string_enum({"scalar", "light", "xyz", "pairs"})}, {"title", Schema::string()}},
      {"input"});
}

AtomDecl always(PersonalAtom a) { return {std::move(a), std::nullopt}; }

AtomDecl when(PersonalAtom a, std::string key, std::vector<Value> values) {
  return {std::move(a), ConfigPredicate{std::move(key), std::move(values)}};
}

LabelTransfer emit(std::vector<AtomDecl> atoms) {
  return {LabelTransfer::Kind::emit, std::move(atoms), {}, {}};
}

LabelTransfer passthrough() { return {}; }

PortSpec in(std::string name, PortRule rule) { return {std::move(name), std::move(rule), {}}; }

PortSpec out(std::string name, PortRule rule, LabelTransfer t = passthrough()) {
  return {std::move(name), std::move(rule), std::move(t)};
}

ValueProfile lux_profile(std::string name, std::string description, double lo, double hi) {
  return {std::move(name), std::move(description), {{".lux", FieldRange{lo, hi, std::nullopt}}}};
}

NodeSpec light() {
  NodeSpec s;
  s.id = "light";
  s.role = Role::datasource;
  s.behavior = "source";
  s.description = "Ambient light level in lux, as measured by a device camera.";
  s.config = Schema::object({{"period_ms", period_schema()}}, {"period_ms"});
  s.outputs = {out("out", PortRule::fixed(light_reading()),
                   emit({always(PersonalAtom::secondary(
                       Category::personal, "presence", {Condition::granularity_at_most(1000)}))}))};
  s.risk = {0, 1, false, std::nullopt, std::nullopt};
  s.granularity_ms = {100, 1000, 10000, 60000};
  s.help =
      "Emits a timestamp and a lux reading between 0 and 130000. Profiles give typical "
      "readings for common lighting conditions; single values are widened by 10% either side.";
  s.profiles = {
      lux_profile("starlight", "Moonless, overcast night sky", 0.00009, 0.00011),
      lux_profile("moonless clear night", "Moonless clear night sky with airglow", 0.0018, 0.0022),
      lux_profile("full moon", "Full moon on a clear night", 0.05, 0.36),
      lux_profile("civil twilight", "Dark limit of civil twilight under a clear sky", 3.06, 3.74),
      lux_profile("dark public areas", "Public areas with dark surroundings", 20, 50),
      lux_profile("family living room", "Family living room lights", 45, 55),
      lux_profile("office hallway", "Office building hallway or toilet lighting", 72, 88),
      lux_profile("very dark overcast day", "Very dark overcast day", 90, 110),
      lux_profile("office lighting", "Office lighting", 320, 500),
      lux_profile("sunrise or sunset", "Sunrise or sunset on a clear day", 360, 440),
      lux_profile("overcast day", "Overcast day", 900, 1100),
      lux_profile("full daylight", "Full daylight", 10000, 25000),
  };
  return s;
}

NodeSpec smartphone() {
  NodeSpec s;
  s.id = "smartphone";
  s.role = Role::datasource;
  s.behavior = "source";
  s.description = "Phone sensors: accelerometer, battery level or Bluetooth scan.";
  s.config = Schema::object({{"period_ms", period_schema()},
                             {"sensor", Schema::string_enum({"accelerometer", "battery", "bluetooth-scan"})},
                             {"timestamps", Schema::boolean()}},
                            {"period_ms", "sensor"});
  s.outputs = {out(
      "out",
      PortRule::select("sensor", {{"accelerometer", xyz()},
                                  {"battery", Schema::number(0, 1)},
                                  {"bluetooth-scan", string_pairs()}}),
      emit({
          when(PersonalAtom::primary(Category::personal, "movement"), "sensor", {"accelerometer"}),
          when(PersonalAtom::secondary(Category::personal, "gait", {Condition::granularity_at_most(20)}),
               "sensor", {"accelerometer"}),
          when(PersonalAtom::primary(Category::personal, "device-usage"), "sensor", {"battery"}),
          when(PersonalAtom::primary(Category::identifier, "device-address"), "sensor", {"bluetooth-scan"}),
          when(PersonalAtom::secondary(Category::personal, "social-graph",
                                       {Condition::requires_atom("timestamp-series")}),
               "sensor", {"bluetooth-scan"}),
          when(PersonalAtom::primary(Category::personal, "timestamp-series"), "timestamps", {true}),
      }))};
  s.risk = {1, 3, false, std::nullopt, std::nullopt};
  s.granularity_ms = {10, 20, 100, 1000, 60000};
  s.help =
      "Accelerometer readings are x, y, z floats; battery level is a float in [0, 1]; a "
      "Bluetooth scan is a list of (address, name) pairs. Sampling the accelerometer every "
      "20 ms or faster permits gait inference; timestamped scans reveal social connections.";
  return s;
}

NodeSpec twitter() {
  NodeSpec s;
  s.id = "twitter";
  s.role = Role::datasource;
  s.behavior = "source";
  s.description = "Synthetic posts from a social feed.";
  s.config = Schema::object({{"period_ms", period_schema()}, {"query", Schema::string()}}, {"period_ms"});
  s.outputs = {out("out",
                   PortRule::fixed(Schema::object(
                       {{"handle", Schema::string()}, {"text", Schema::string()}, {"ts", Schema::number()}},
                       {"handle", "text", "ts"})),
                   emit({always(PersonalAtom::primary(Category::identifier, "handle")),
                         always(PersonalAtom::primary(Category::personal, "opinions"))}))};
  s.risk = {1, 3, false, std::nullopt, std::nullopt};
  s.granularity_ms = {1000, 60000};
  s.help = "Each post carries the author's handle, the text and a timestamp.";
  return s;
}

NodeSpec function() {
  NodeSpec s;
  s.id = "function";
  s.role = Role::processor;
  s.behavior = "function";
  s.description = "Computes its output with an expression over msg.";
  s.config = Schema::object({{"body", Schema::string()}}, {"body"});
  s.inputs = {in("in", PortRule::inferred())};
  s.outputs = {out("out", PortRule::inferred())};
  s.risk = {1, 3, false, std::nullopt, std::nullopt};
  s.help = "The input type is taken from upstream, the output type from downstream consumers.";
  return s;
}

NodeSpec extract() {
  NodeSpec s;
  s.id = "extract";
  s.role = Role::processor;
  s.behavior = "extract";
  s.description = "Keeps the listed fields of each message.";
  s.config = Schema::object({{"drop", Schema::array(Schema::string())},
                             {"fields", Schema::array(Schema::string(), 1)}},
                            {"fields"});
  s.inputs = {in("in", PortRule::inferred())};
  LabelTransfer t;
  t.kind = LabelTransfer::Kind::filter;
  t.drop_config_key = "drop";
  s.outputs = {out("out", PortRule::inferred(), std::move(t))};
  s.risk = {0, 1, false, std::nullopt, std::nullopt};
  s.help = "`drop` lists personal-data categories or tags the projection removes.";
  return s;
}

NodeSpec trigger() {
  NodeSpec s;
  s.id = "trigger";
  s.role = Role::processor;
  s.behavior = "trigger";
  s.description = "Emits true each time `field op threshold` becomes true.";
  s.config = Schema::object({{"field", Schema::string()},
                             {"op", Schema::string_enum({">", ">=", "<", "<=", "==", "!="})},
                             {"threshold", Schema::number()}},
                            {"field", "op", "threshold"});
  s.inputs = {in("in", PortRule::inferred())};
  s.outputs = {out("out", PortRule::fixed(Schema::boolean()))};
  s.risk = {0, 1, false, std::nullopt, std::nullopt};
  return s;
}

NodeSpec combine() {
  NodeSpec s;
  s.id = "combine";
  s.role = Role::processor;
  s.behavior = "combine";
  s.description = "Pairs the latest left and right messages into {left, right}.";
  s.inputs = {in("left", PortRule::inferred()), in("right", PortRule::inferred())};
  s.outputs = {out("out", PortRule::inferred())};
  s.risk = {0, 1, false, std::nullopt, std::nullopt};
  return s;
}

NodeSpec chart() {
  NodeSpec s;
  s.id = "chart";
  s.role = Role::processor;
  s.behavior = "chart";
  s.description = "Turns readings into a plottable series point.";
  s.config = chart_config();
  s.inputs = {in("in", PortRule::select("input", chart_inputs()))};
  s.outputs = {out("out", PortRule::fixed(chart_series_schema()))};
  s.risk = {0, 1, false, std::nullopt, std::nullopt};
  s.help = "Pick the input shape to plot: a scalar, a light reading, x/y/z or string pairs.";
  return s;
}

NodeSpec aggregate() {
  NodeSpec s;
  s.id = "aggregate";
  s.role = Role::processor;
  s.behavior = "aggregate";
  s.description = "Counts messages; emits only the running count.";
  s.inputs = {in("in", PortRule::inferred())};
  s.outputs = {out("out", PortRule::fixed(Schema::object({{"count", Schema::integer(0, 9007199254740992.0)}},
                                                          {"count"})),
                   LabelTransfer{LabelTransfer::Kind::clear, {}, {}, {}})};
  s.risk = {0, 1, false, std::nullopt, std::nullopt};
  return s;
}

NodeSpec sink(std::string id, std::string description, PortRule rule, RiskDecl risk) {
  NodeSpec s;
  s.id = std::move(id);
  s.role = Role::output;
  s.behavior = "sink";
  s.description = std::move(description);
  s.inputs = {in("in", std::move(rule))};
  s.risk = std::move(risk);
  return s;
}

}  // namespace

Schema chart_series_schema() {
  return Schema::object(
      {{"t", Schema::number()}, {"title", Schema::string()}, {"values", Schema::array(Schema::number())}},
      {"t", "title", "values"});
}

SpecRegistry builtin_specs() {
  SpecRegistry r;
  r.add(light());
  r.add(smartphone());
  r.add(twitter());
  r.add(function());
  r.add(extract());
  r.add(trigger());
  r.add(combine());
  r.add(chart());
  r.add(aggregate());
  r.add(sink("debug", "Shows every message it receives.", PortRule::inferred(), {0, 0, false, {}, {}}));
  r.add(sink("display", "Renders a chart series on the device screen.", PortRule::fixed(chart_series_schema()),
             {0, 1, false, {}, {}}));

  NodeSpec chart_data = sink("chart-data", "Collects plottable series.", PortRule::select("input", chart_inputs()),
                             {0, 1, false, {}, {}});
  chart_data.config = chart_config();
  r.add(std::move(chart_data));

  NodeSpec exp = sink("export", "Sends messages to an archive or an external service.", PortRule::inferred(),
                      {1, 4, false, ConfigPredicate{"destination", {"cloud", "third-party"}}, std::nullopt});
  exp.config = Schema::object({{"destination", Schema::string_enum({"local-archive", "cloud", "third-party"})}},
                              {"destination"});
  r.add(std::move(exp));

  NodeSpec act = sink("actuate", "Switches a connected device.", PortRule::fixed(Schema::boolean()),
                      {1, 3, false, std::nullopt, ConfigPredicate{}});
  act.config = Schema::object(
      {{"action", Schema::string_enum({"on", "off", "toggle"})}, {"device", Schema::string()}}, {"device"});
  r.add(std::move(act));
  return r;
}

}  // namespace privflow
