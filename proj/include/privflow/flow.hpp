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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "privflow/labels.hpp"
#include "privflow/schema.hpp"
#include "privflow/value.hpp"

namespace privflow {

enum class Role { datasource, processor, output };
enum class Direction { in, out };

std::string_view to_string(Role role) noexcept;

/// How a port's schema follows from the node's configuration.
///   fixed    - one schema for every configuration
///   select   - config[key] (a string enum) picks one of `cases`
///   inferred - derived from the surrounding flow (see checker.hpp)
struct PortRule {
  enum class Mode { fixed, select, inferred };

  Mode mode = Mode::inferred;
  Schema schema;
  std::string key;
  std::map<std::string, Schema> cases;

  static PortRule fixed(Schema s) { return {Mode::fixed, std::move(s), {}, {}}; }
  static PortRule select(std::string key, std::map<std::string, Schema> cases) {
    return {Mode::select, {}, std::move(key), std::move(cases)};
  }
  static PortRule inferred() { return {}; }
};

struct PortSpec {
  std::string name;
  PortRule rule;
  LabelTransfer transfer;  // output ports only
};

struct RiskDecl {
  int lo = 0;
  int hi = 0;
  bool insecure_hardware = false;
  std::optional<ConfigPredicate> exports_off_box;
  std::optional<ConfigPredicate> physical_actuation;
};

struct NodeSpec {
  std::string id;
  Role role = Role::processor;
  /// Runtime semantics: source, function, extract, trigger, combine, chart,
  /// aggregate, passthrough, sink.
  std::string behavior;
  std::string description;
  Schema config = Schema::object({}, {});
  std::vector<PortSpec> inputs;
  std::vector<PortSpec> outputs;
  RiskDecl risk;
  std::string help;
  std::vector<ValueProfile> profiles;
  /// Offered sampling periods (ms); when present, config.period_ms must be one.
  std::vector<std::int64_t> granularity_ms;

  const PortSpec* input(std::string_view name) const;
  const PortSpec* output(std::string_view name) const;
  const PortSpec* port(std::string_view name, Direction dir) const;
  const ValueProfile* profile(std::string_view name) const;
};

/// A config that validates under the node spec: first enum value, lower bound
/// (or 0), false, minimal arrays, required properties only, and the first
/// granularity option for period_ms.
Value default_config(const NodeSpec& spec);

/// Throws Error(invalid_spec) when a NodeSpec invariant does not hold.
void validate_nodespec(const NodeSpec& spec);

Value nodespec_to_json(const NodeSpec& spec);
NodeSpec nodespec_from_json(const Value& doc);

class SpecRegistry {
 public:
  /// Throws Error(duplicate_spec) or Error(invalid_spec).
  void add(NodeSpec spec);

  const NodeSpec* find(std::string_view id) const;
  /// Throws Error(unknown_spec).
  const NodeSpec& at(std::string_view id) const;

  auto begin() const { return specs_.begin(); }
  auto end() const { return specs_.end(); }
  std::size_t size() const { return specs_.size(); }

 private:
  std::map<std::string, NodeSpec, std::less<>> specs_;
};

void register_nodespec(SpecRegistry& registry, NodeSpec spec);

Value registry_to_json(const SpecRegistry& registry);

/// Adds every spec found in `*.json` files of `dir` (one spec or an array of
/// specs per file), in file name order.
void load_spec_dir(SpecRegistry& registry, const std::string& dir);

struct NodeInstance {
  std::string id;
  std::string spec;
  Value config = Value::object();

  friend bool operator==(const NodeInstance&, const NodeInstance&) = default;
};

struct Endpoint {
  std::string node;
  std::string port;

  auto operator<=>(const Endpoint&) const = default;
};

struct Wire {
  Endpoint from;
  Endpoint to;

  auto operator<=>(const Wire&) const = default;
};

std::string to_string(const Wire& w);
Value wire_to_json(const Wire& w);
Wire wire_from_json(const Value& doc);

struct FlowMeta {
  std::string author;
  std::string description;

  friend bool operator==(const FlowMeta&, const FlowMeta&) = default;
};

/// Nodes keyed by id and wires as an ordered set give the canonical order
/// for free.
struct FlowGraph {
  std::string id;
  std::string name;
  std::string version;
  FlowMeta meta;
  std::map<std::string, NodeInstance> nodes;
  std::set<Wire> wires;

  std::vector<Wire> wires_into(std::string_view node) const;
  std::vector<Wire> wires_from(std::string_view node) const;

  friend bool operator==(const FlowGraph&, const FlowGraph&) = default;
};

/// Throws Error(unknown_spec | dangling_wire | bad_config | ...) naming the
/// node or wire at fault.
void validate_flow(const FlowGraph& flow, const SpecRegistry& registry);

FlowGraph flow_from_json(const Value& doc, const SpecRegistry& registry);
FlowGraph load_flow(std::string_view bytes, const SpecRegistry& registry);
OrderedValue flow_to_json(const FlowGraph& flow);
/// Canonical bytes: 2-space indent, trailing newline.
std::string save_flow(const FlowGraph& flow);

/// Schema the port carries under the node's configuration; nullopt for
/// inferred ports. Throws Error(unknown_port).
std::optional<Schema> resolve_port_schema(const NodeInstance& node, const NodeSpec& spec,
                                          std::string_view port, Direction dir);

namespace edit {
struct AddNode {
  NodeInstance node;
};
struct RemoveNode {
  std::string id;
};
struct AddWire {
  Wire wire;
};
struct RemoveWire {
  Wire wire;
};
struct ReconfigureNode {
  std::string id;
  Value config;
};
}  // namespace edit

using FlowEdit = std::variant<edit::AddNode, edit::RemoveNode, edit::AddWire, edit::RemoveWire,
                              edit::ReconfigureNode>;

struct ChangedSet {
  std::set<std::string> nodes;
  std::set<Wire> wires;

  bool touches(const Wire& w) const {
    return wires.count(w) || nodes.count(w.from.node) || nodes.count(w.to.node);
  }
};

struct EditResult {
  FlowGraph flow;
  ChangedSet changed;
};

/// Applies the edit atomically (the input is never modified). The changed
/// set covers the edit site, its direct predecessors and everything
/// downstream of either, in the graph before or after the edit.
EditResult apply_edit(const FlowGraph& flow, const FlowEdit& e, const SpecRegistry& registry);

/// Nodes reachable from `seeds` along wires, seeds included.
std::set<std::string> downstream_closure(const FlowGraph& flow, const std::set<std::string>& seeds);

}  // namespace privflow
