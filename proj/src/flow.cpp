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

#include "privflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "privflow/error.hpp"

namespace privflow {

namespace {

std::string node_loc(std::string_view id) { return "node:" + std::string(id); }
std::string wire_loc(const Wire& w) { return "wire:" + to_string(w); }

[[noreturn]] void invalid(const std::string& spec, const std::string& what) {
  throw Error(Errc::invalid_spec, "spec:" + spec, what);
}

const PortSpec* find_port(const std::vector<PortSpec>& ports, std::string_view name) {
  for (const auto& p : ports) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

Value minimal_value(const Schema& s) {
  switch (s.kind) {
    case Kind::boolean: return false;
    case Kind::integer:
    case Kind::number: {
      double v = 0;
      if (s.minimum && v < *s.minimum) v = *s.minimum;
      if (s.maximum && v > *s.maximum) v = *s.maximum;
      if (s.kind == Kind::integer) return static_cast<std::int64_t>(std::ceil(v));
      return v;
    }
    case Kind::string:
      return s.enumeration ? Value(s.enumeration->front()) : Value("");
    case Kind::array: {
      Value out = Value::array();
      for (std::uint64_t i = 0; i < s.min_len.value_or(0); ++i) out.push_back(minimal_value(s.item()));
      return out;
    }
    case Kind::object: {
      Value out = Value::object();
      for (const auto& name : s.required) out[name] = minimal_value(*s.property(name));
      return out;
    }
    case Kind::union_of: return minimal_value(s.arms.front());
  }
  return nullptr;
}

void check_transfer(const NodeSpec& spec, const PortSpec& port) {
  for (const auto& d : port.transfer.atoms) {
    const auto& a = d.atom;
    if (a.derivation == Derivation::primary && !a.conditions.empty()) {
      invalid(spec.id, "primary atom \"" + a.tag + "\" on port " + port.name + " carries conditions");
    }
    if (a.derivation == Derivation::secondary && a.conditions.empty()) {
      invalid(spec.id, "secondary atom \"" + a.tag + "\" on port " + port.name + " has no condition");
    }
    for (const auto& c : a.conditions) {
      if (c.kind == Condition::Kind::granularity_at_most && c.period_ms <= 0) {
        invalid(spec.id, "granularity condition on \"" + a.tag + "\" needs a positive period");
      }
    }
  }
}

void check_port(const NodeSpec& spec, const PortSpec& port) {
  if (port.name.empty()) invalid(spec.id, "port with an empty name");
  try {
    switch (port.rule.mode) {
      case PortRule::Mode::fixed:
        check_schema(port.rule.schema);
        break;
      case PortRule::Mode::select: {
        const Schema* key = spec.config.property(port.rule.key);
        if (!key || !spec.config.is_required(port.rule.key) || key->kind != Kind::string ||
            !key->enumeration) {
          invalid(spec.id, "port " + port.name + " selects on \"" + port.rule.key +
                               "\", which is not a required string enum of the config");
        }
        for (const auto& v : *key->enumeration) {
          if (!port.rule.cases.count(v)) {
            invalid(spec.id, "port " + port.name + " has no schema for " + port.rule.key + "=\"" + v + "\"");
          }
        }
        for (const auto& [v, s] : port.rule.cases) {
          if (std::find(key->enumeration->begin(), key->enumeration->end(), v) ==
              key->enumeration->end()) {
            invalid(spec.id, "port " + port.name + " has a case \"" + v + "\" outside the config enum");
          }
          check_schema(s);
        }
        break;
      }
      case PortRule::Mode::inferred:
        break;
    }
  } catch (const Error& e) {
    if (e.code() == Errc::invalid_spec) throw;
    invalid(spec.id, "port " + port.name + ": " + e.what());
  }
}

Value predicate_or_flag_to_json(const std::optional<ConfigPredicate>& p) {
  if (!p) return false;
  if (p->key.empty()) return true;
  return predicate_to_json(*p);
}

std::optional<ConfigPredicate> predicate_or_flag_from_json(const Value& doc) {
  if (doc.is_boolean()) {
    if (doc.get<bool>()) return ConfigPredicate{};
    return std::nullopt;
  }
  return predicate_from_json(doc);
}

Value port_to_json(const PortSpec& p, bool output) {
  Value out = Value{{"name", p.name}};
  switch (p.rule.mode) {
    case PortRule::Mode::fixed: out["schema"] = schema_to_json(p.rule.schema); break;
    case PortRule::Mode::select: {
      Value cases = Value::object();
      for (const auto& [k, s] : p.rule.cases) cases[k] = schema_to_json(s);
      out["select"] = Value{{"key", p.rule.key}, {"cases", std::move(cases)}};
      break;
    }
    case PortRule::Mode::inferred: out["inferred"] = true; break;
  }
  if (output) out["labels"] = transfer_to_json(p.transfer);
  return out;
}

PortSpec port_from_json(const Value& doc, bool output) {
  if (!doc.is_object() || !doc.contains("name")) {
    throw Error(Errc::parse_error, "", "port needs a \"name\"");
  }
  PortSpec p;
  p.name = doc["name"].get<std::string>();
  if (doc.contains("schema")) {
    p.rule = PortRule::fixed(schema_from_json(doc["schema"]));
  } else if (doc.contains("select")) {
    const auto& sel = doc["select"];
    std::map<std::string, Schema> cases;
    for (const auto& [k, s] : sel.at("cases").items()) cases.emplace(k, schema_from_json(s));
    p.rule = PortRule::select(sel.at("key").get<std::string>(), std::move(cases));
  } else {
    p.rule = PortRule::inferred();
  }
  if (output && doc.contains("labels")) p.transfer = transfer_from_json(doc["labels"]);
  return p;
}

}  // namespace

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::datasource: return "datasource";
    case Role::processor: return "processor";
    case Role::output: return "output";
  }
  return "?";
}

const PortSpec* NodeSpec::input(std::string_view name) const { return find_port(inputs, name); }
const PortSpec* NodeSpec::output(std::string_view name) const { return find_port(outputs, name); }

const PortSpec* NodeSpec::port(std::string_view name, Direction dir) const {
  return dir == Direction::in ? input(name) : output(name);
}

const ValueProfile* NodeSpec::profile(std::string_view name) const {
  for (const auto& p : profiles) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

Value default_config(const NodeSpec& spec) {
  Value config = minimal_value(spec.config);
  if (!spec.granularity_ms.empty() && config.is_object()) {
    config["period_ms"] = spec.granularity_ms.front();
  }
  return config;
}

void validate_nodespec(const NodeSpec& spec) {
  if (spec.id.empty()) invalid(spec.id, "empty spec id");
  if (spec.role == Role::datasource && !spec.inputs.empty()) {
    invalid(spec.id, "datasource specs take no inputs");
  }
  if (spec.role == Role::output && !spec.outputs.empty()) {
    invalid(spec.id, "output specs have no output ports");
  }
  if (spec.risk.lo < 0 || spec.risk.hi > 5 || spec.risk.lo > spec.risk.hi) {
    invalid(spec.id, "risk spectrum [" + std::to_string(spec.risk.lo) + "," +
                         std::to_string(spec.risk.hi) + "] is not within 0 <= lo <= hi <= 5");
  }
  try {
    check_schema(spec.config);
  } catch (const Error& e) {
    invalid(spec.id, std::string("config schema: ") + e.what());
  }
  if (spec.config.kind != Kind::object) invalid(spec.id, "config schema must be an object");

  std::set<std::string> seen;
  for (const auto& p : spec.inputs) {
    if (!seen.insert("in:" + p.name).second) invalid(spec.id, "duplicate input port " + p.name);
    check_port(spec, p);
  }
  for (const auto& p : spec.outputs) {
    if (!seen.insert("out:" + p.name).second) invalid(spec.id, "duplicate output port " + p.name);
    check_port(spec, p);
    check_transfer(spec, p);
  }

  if (!spec.granularity_ms.empty()) {
    const Schema* period = spec.config.property("period_ms");
    if (!period || period->kind != Kind::integer) {
      invalid(spec.id, "granularity options need an integer config.period_ms");
    }
    for (auto g : spec.granularity_ms) {
      if (g <= 0) invalid(spec.id, "granularity options must be positive");
      if (!validate_value(g, *period)) invalid(spec.id, "granularity option outside config.period_ms");
    }
  }

  if (!spec.profiles.empty()) {
    if (spec.outputs.empty() || spec.outputs.front().rule.mode != PortRule::Mode::fixed) {
      invalid(spec.id, "profiles need a fixed schema on the first output port");
    }
    std::set<std::string> names;
    for (const auto& p : spec.profiles) {
      if (!names.insert(p.name).second) invalid(spec.id, "duplicate profile \"" + p.name + "\"");
      try {
        check_profile(spec.outputs.front().rule.schema, p);
      } catch (const Error& e) {
        invalid(spec.id, "profile \"" + p.name + "\": " + e.what());
      }
    }
  }

  try {
    if (!validate_value(default_config(spec), spec.config)) {
      invalid(spec.id, "config schema admits no default configuration");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::invalid_spec) throw;
    invalid(spec.id, e.what());
  }
}

Value nodespec_to_json(const NodeSpec& spec) {
  Value inputs = Value::array();
  for (const auto& p : spec.inputs) inputs.push_back(port_to_json(p, false));
  Value outputs = Value::array();
  for (const auto& p : spec.outputs) outputs.push_back(port_to_json(p, true));
  Value profiles = Value::array();
  for (const auto& p : spec.profiles) profiles.push_back(profile_to_json(p));
  return Value{
      {"id", spec.id},
      {"role", to_string(spec.role)},
      {"behavior", spec.behavior},
      {"description", spec.description},
      {"config", schema_to_json(spec.config)},
      {"inputs", std::move(inputs)},
      {"outputs", std::move(outputs)},
      {"risk",
       {{"spectrum", {spec.risk.lo, spec.risk.hi}},
        {"insecure_hardware", spec.risk.insecure_hardware},
        {"exports_off_box", predicate_or_flag_to_json(spec.risk.exports_off_box)},
        {"physical_actuation", predicate_or_flag_to_json(spec.risk.physical_actuation)}}},
      {"granularity_ms", spec.granularity_ms},
      {"help", {{"text", spec.help}, {"profiles", std::move(profiles)}}},
  };
}

NodeSpec nodespec_from_json(const Value& doc) {
  if (!doc.is_object()) throw Error(Errc::parse_error, "", "node spec must be an object");
  NodeSpec spec;
  try {
    spec.id = doc.at("id").get<std::string>();
    const auto role = doc.at("role").get<std::string>();
    if (role == "datasource") spec.role = Role::datasource;
    else if (role == "processor") spec.role = Role::processor;
    else if (role == "output") spec.role = Role::output;
    else throw Error(Errc::parse_error, "spec:" + spec.id, "unknown role \"" + role + "\"");
    spec.behavior = doc.value("behavior", "passthrough");
    spec.description = doc.value("description", "");
    if (doc.contains("config")) spec.config = schema_from_json(doc["config"]);
    for (const auto& p : doc.value("inputs", Value::array())) spec.inputs.push_back(port_from_json(p, false));
    for (const auto& p : doc.value("outputs", Value::array())) spec.outputs.push_back(port_from_json(p, true));
    if (doc.contains("risk")) {
      const auto& r = doc["risk"];
      const auto& spectrum = r.at("spectrum");
      spec.risk.lo = spectrum.at(0).get<int>();
      spec.risk.hi = spectrum.at(1).get<int>();
      spec.risk.insecure_hardware = r.value("insecure_hardware", false);
      if (r.contains("exports_off_box")) spec.risk.exports_off_box = predicate_or_flag_from_json(r["exports_off_box"]);
      if (r.contains("physical_actuation")) {
        spec.risk.physical_actuation = predicate_or_flag_from_json(r["physical_actuation"]);
      }
    }
    spec.granularity_ms = doc.value("granularity_ms", std::vector<std::int64_t>{});
    if (doc.contains("help")) {
      spec.help = doc["help"].value("text", "");
      for (const auto& p : doc["help"].value("profiles", Value::array())) {
        spec.profiles.push_back(profile_from_json(p));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, "spec:" + spec.id, e.what());
  }
  return spec;
}

void SpecRegistry::add(NodeSpec spec) {
  validate_nodespec(spec);
  if (specs_.count(spec.id)) {
    throw Error(Errc::duplicate_spec, "spec:" + spec.id, "spec \"" + spec.id + "\" is already registered");
  }
  auto id = spec.id;
  specs_.emplace(std::move(id), std::move(spec));
}

const NodeSpec* SpecRegistry::find(std::string_view id) const {
  auto it = specs_.find(id);
  return it == specs_.end() ? nullptr : &it->second;
}

const NodeSpec& SpecRegistry::at(std::string_view id) const {
  if (const NodeSpec* s = find(id)) return *s;
  throw Error(Errc::unknown_spec, "spec:" + std::string(id), "no spec \"" + std::string(id) + "\"");
}

void register_nodespec(SpecRegistry& registry, NodeSpec spec) { registry.add(std::move(spec)); }

Value registry_to_json(const SpecRegistry& registry) {
  Value out = Value::array();
  for (const auto& [id, spec] : registry) out.push_back(nodespec_to_json(spec));
  return out;
}

void load_spec_dir(SpecRegistry& registry, const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(Errc::parse_error, dir, "not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    Value doc = Value::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(Errc::parse_error, f.string(), "invalid JSON");
    if (doc.is_array()) {
      for (const auto& s : doc) registry.add(nodespec_from_json(s));
    } else {
      registry.add(nodespec_from_json(doc));
    }
  }
}

std::string to_string(const Wire& w) {
  return w.from.node + "." + w.from.port + "->" + w.to.node + "." + w.to.port;
}

Value wire_to_json(const Wire& w) {
  return Value{{"from", {w.from.node, w.from.port}}, {"to", {w.to.node, w.to.port}}};
}

Wire wire_from_json(const Value& doc) {
  auto endpoint = [](const Value& v) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_string() || !v[1].is_string()) {
      throw Error(Errc::parse_error, "", "wire endpoint must be [node, port]");
    }
    return Endpoint{v[0].get<std::string>(), v[1].get<std::string>()};
  };
  if (!doc.is_object() || !doc.contains("from") || !doc.contains("to") || doc.size() != 2) {
    throw Error(Errc::parse_error, "", "wire must be {from, to}");
  }
  return Wire{endpoint(doc["from"]), endpoint(doc["to"])};
}

std::vector<Wire> FlowGraph::wires_into(std::string_view node) const {
  std::vector<Wire> out;
  for (const auto& w : wires) {
    if (w.to.node == node) out.push_back(w);
  }
  return out;
}

std::vector<Wire> FlowGraph::wires_from(std::string_view node) const {
  std::vector<Wire> out;
  for (const auto& w : wires) {
    if (w.from.node == node) out.push_back(w);
  }
  return out;
}

namespace {

void validate_node(const NodeInstance& n, const SpecRegistry& registry) {
  if (n.id.empty()) throw Error(Errc::bad_config, "node:", "node id must be non-empty");
  const NodeSpec* spec = registry.find(n.spec);
  if (!spec) {
    throw Error(Errc::unknown_spec, node_loc(n.id), "node " + n.id + " uses unknown spec \"" + n.spec + "\"");
  }
  auto v = validate_value(n.config, spec->config);
  if (!v) {
    const auto& first = v.violations.front();
    throw Error(Errc::bad_config, node_loc(n.id),
                "config of " + n.id + " invalid at " + first.path + ": " + first.message);
  }
  if (!spec->granularity_ms.empty() && n.config.contains("period_ms")) {
    const auto period = n.config["period_ms"];
    const bool offered = std::any_of(spec->granularity_ms.begin(), spec->granularity_ms.end(),
                                     [&](std::int64_t g) { return period == g; });
    if (!offered) {
      throw Error(Errc::bad_config, node_loc(n.id),
                  "period_ms " + period.dump() + " is not a granularity offered by " + n.spec);
    }
  }
}

void validate_wire(const FlowGraph& flow, const Wire& w, const SpecRegistry& registry) {
  auto check_end = [&](const Endpoint& e, Direction dir) {
    auto it = flow.nodes.find(e.node);
    if (it == flow.nodes.end()) {
      throw Error(Errc::dangling_wire, wire_loc(w), "wire references missing node " + e.node);
    }
    const NodeSpec& spec = registry.at(it->second.spec);
    if (!spec.port(e.port, dir)) {
      throw Error(Errc::dangling_wire, wire_loc(w),
                  "node " + e.node + " (" + spec.id + ") has no " +
                      (dir == Direction::in ? "input" : "output") + " port \"" + e.port + "\"");
    }
  };
  check_end(w.from, Direction::out);
  check_end(w.to, Direction::in);
}

}  // namespace

void validate_flow(const FlowGraph& flow, const SpecRegistry& registry) {
  for (const auto& [id, n] : flow.nodes) {
    if (id != n.id) throw Error(Errc::bad_config, node_loc(id), "node key and id disagree");
    validate_node(n, registry);
  }
  for (const auto& w : flow.wires) validate_wire(flow, w, registry);
}

FlowGraph flow_from_json(const Value& doc, const SpecRegistry& registry) {
  static const std::set<std::string> kKeys = {"id", "name", "version", "meta", "nodes", "wires"};
  if (!doc.is_object()) throw Error(Errc::parse_error, "", "flow must be a JSON object");
  for (const auto& [k, v] : doc.items()) {
    if (!kKeys.count(k)) throw Error(Errc::unknown_key, k, "unknown top-level key \"" + k + "\"");
  }
  FlowGraph flow;
  try {
    flow.id = doc.value("id", "");
    flow.name = doc.value("name", "");
    flow.version = doc.value("version", "");
    if (doc.contains("meta")) {
      const auto& m = doc["meta"];
      if (!m.is_object()) throw Error(Errc::parse_error, "meta", "meta must be an object");
      flow.meta.author = m.value("author", "");
      flow.meta.description = m.value("description", "");
    }
    for (const auto& n : doc.value("nodes", Value::array())) {
      if (!n.is_object() || !n.contains("id") || !n.contains("spec")) {
        throw Error(Errc::parse_error, "nodes", "node must have id and spec");
      }
      for (const auto& [k, v] : n.items()) {
        if (k != "id" && k != "spec" && k != "config") {
          throw Error(Errc::unknown_key, node_loc(n["id"].get<std::string>()), "unknown node key \"" + k + "\"");
        }
      }
      NodeInstance inst{n["id"].get<std::string>(), n["spec"].get<std::string>(),
                        n.value("config", Value::object())};
      if (flow.nodes.count(inst.id)) {
        throw Error(Errc::duplicate_node, node_loc(inst.id), "duplicate node id " + inst.id);
      }
      auto id = inst.id;
      flow.nodes.emplace(std::move(id), std::move(inst));
    }
    for (const auto& wj : doc.value("wires", Value::array())) {
      Wire w = wire_from_json(wj);
      if (!flow.wires.insert(w).second) {
        throw Error(Errc::duplicate_wire, wire_loc(w), "duplicate wire " + to_string(w));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, "", e.what());
  }
  validate_flow(flow, registry);
  return flow;
}

FlowGraph load_flow(std::string_view bytes, const SpecRegistry& registry) {
  Value doc;
  try {
    doc = Value::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse_error, "byte " + std::to_string(e.byte), e.what());
  }
  return flow_from_json(doc, registry);
}

OrderedValue flow_to_json(const FlowGraph& flow) {
  OrderedValue out = OrderedValue::object();
  out["id"] = flow.id;
  out["name"] = flow.name;
  out["version"] = flow.version;
  out["meta"] = OrderedValue{{"author", flow.meta.author}, {"description", flow.meta.description}};
  OrderedValue nodes = OrderedValue::array();
  for (const auto& [id, n] : flow.nodes) {
    OrderedValue node = OrderedValue::object();
    node["id"] = n.id;
    node["spec"] = n.spec;
    node["config"] = to_ordered(n.config);
    nodes.push_back(std::move(node));
  }
  out["nodes"] = std::move(nodes);
  OrderedValue wires = OrderedValue::array();
  for (const auto& w : flow.wires) {
    OrderedValue wire = OrderedValue::object();
    wire["from"] = {w.from.node, w.from.port};
    wire["to"] = {w.to.node, w.to.port};
    wires.push_back(std::move(wire));
  }
  out["wires"] = std::move(wires);
  return out;
}

std::string save_flow(const FlowGraph& flow) { return flow_to_json(flow).dump(2) + "\n"; }

std::optional<Schema> resolve_port_schema(const NodeInstance& node, const NodeSpec& spec,
                                          std::string_view port, Direction dir) {
  const PortSpec* p = spec.port(port, dir);
  if (!p) {
    throw Error(Errc::unknown_port, node_loc(node.id),
                std::string(spec.id) + " has no " + (dir == Direction::in ? "input" : "output") +
                    " port \"" + std::string(port) + "\"");
  }
  switch (p->rule.mode) {
    case PortRule::Mode::fixed: return p->rule.schema;
    case PortRule::Mode::select: {
      auto it = node.config.find(p->rule.key);
      if (it == node.config.end() || !it->is_string()) {
        throw Error(Errc::bad_config, node_loc(node.id), "config." + p->rule.key + " is not set");
      }
      auto c = p->rule.cases.find(it->get<std::string>());
      if (c == p->rule.cases.end()) {
        throw Error(Errc::bad_config, node_loc(node.id), "no schema for " + p->rule.key + "=" + it->dump());
      }
      return c->second;
    }
    case PortRule::Mode::inferred: return std::nullopt;
  }
  return std::nullopt;
}

std::set<std::string> downstream_closure(const FlowGraph& flow, const std::set<std::string>& seeds) {
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& w : flow.wires) succ[w.from.node].push_back(w.to.node);
  std::set<std::string> seen;
  std::vector<std::string> stack(seeds.begin(), seeds.end());
  while (!stack.empty()) {
    auto n = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    for (const auto& m : succ[n]) {
      if (!seen.count(m)) stack.push_back(m);
    }
  }
  return seen;
}

namespace {

const NodeInstance& existing_node(const FlowGraph& flow, const std::string& id) {
  auto it = flow.nodes.find(id);
  if (it == flow.nodes.end()) throw Error(Errc::missing_entity, node_loc(id), "no node " + id);
  return it->second;
}

void check_wire_for_edit(const FlowGraph& flow, const Wire& w, const SpecRegistry& registry) {
  for (const auto& [e, dir] : {std::pair{&w.from, Direction::out}, std::pair{&w.to, Direction::in}}) {
    auto it = flow.nodes.find(e->node);
    if (it == flow.nodes.end()) throw Error(Errc::missing_entity, wire_loc(w), "no node " + e->node);
    if (!registry.at(it->second.spec).port(e->port, dir)) {
      throw Error(Errc::unknown_port, wire_loc(w), "node " + e->node + " has no port \"" + e->port + "\"");
    }
  }
}

}  // namespace

EditResult apply_edit(const FlowGraph& flow, const FlowEdit& e, const SpecRegistry& registry) {
  FlowGraph next = flow;
  std::set<std::string> site;
  std::set<Wire> touched;

  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, edit::AddNode>) {
          if (next.nodes.count(op.node.id)) {
            throw Error(Errc::duplicate_node, node_loc(op.node.id), "node " + op.node.id + " already exists");
          }
          validate_node(op.node, registry);
          next.nodes.emplace(op.node.id, op.node);
          site.insert(op.node.id);
        } else if constexpr (std::is_same_v<T, edit::RemoveNode>) {
          existing_node(next, op.id);
          next.nodes.erase(op.id);
          for (auto it = next.wires.begin(); it != next.wires.end();) {
            if (it->from.node == op.id || it->to.node == op.id) {
              touched.insert(*it);
              it = next.wires.erase(it);
            } else {
              ++it;
            }
          }
          site.insert(op.id);
        } else if constexpr (std::is_same_v<T, edit::AddWire>) {
          check_wire_for_edit(next, op.wire, registry);
          if (!next.wires.insert(op.wire).second) {
            throw Error(Errc::duplicate_wire, wire_loc(op.wire), "wire already exists");
          }
          touched.insert(op.wire);
          site.insert(op.wire.from.node);
          site.insert(op.wire.to.node);
        } else if constexpr (std::is_same_v<T, edit::RemoveWire>) {
          if (!next.wires.erase(op.wire)) {
            throw Error(Errc::missing_entity, wire_loc(op.wire), "no wire " + to_string(op.wire));
          }
          touched.insert(op.wire);
          site.insert(op.wire.from.node);
          site.insert(op.wire.to.node);
        } else {
          NodeInstance updated = existing_node(next, op.id);
          updated.config = op.config;
          validate_node(updated, registry);
          next.nodes[op.id] = std::move(updated);
          site.insert(op.id);
        }
      },
      e);

  // Analyses may flow backwards one hop (a producer's output type can depend
  // on its consumers), so predecessors of the site are seeds too.
  FlowGraph both = next;
  both.wires.insert(flow.wires.begin(), flow.wires.end());
  std::set<std::string> seeds = site;
  for (const auto& w : both.wires) {
    if (site.count(w.to.node)) seeds.insert(w.from.node);
  }
  ChangedSet changed{downstream_closure(both, seeds), std::move(touched)};
  return {std::move(next), std::move(changed)};
}

}  // namespace privflow
