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

#include "privflow/checker.hpp"

#include <algorithm>
#include <functional>

#include "privflow/error.hpp"
#include "privflow/expr.hpp"

namespace privflow {

std::string_view to_string(Severity s) noexcept {
  switch (s) {
    case Severity::info: return "info";
    case Severity::warning: return "warning";
    case Severity::error: return "error";
  }
  return "error";
}

Severity severity_from_string(std::string_view s) {
  if (s == "info") return Severity::info;
  if (s == "warning") return Severity::warning;
  if (s == "error") return Severity::error;
  throw Error(Errc::parse_error, "severity", "unknown severity " + std::string(s));
}

std::string node_loc(std::string_view node) { return "node:" + std::string(node); }
std::string wire_loc(const Wire& w) { return "wire:" + to_string(w); }

Value diagnostic_to_json(const Diagnostic& d) {
  return Value{{"severity", to_string(d.severity)}, {"code", d.code}, {"loc", d.loc}, {"message", d.message}};
}

Diagnostic diagnostic_from_json(const Value& doc) {
  try {
    return Diagnostic{severity_from_string(doc.at("severity").get<std::string>()), doc.at("code").get<std::string>(),
                      doc.at("loc").get<std::string>(), doc.at("message").get<std::string>()};
  } catch (const Value::exception& e) {
    throw Error(Errc::parse_error, "diagnostic", e.what());
  }
}

const Schema* FlowTyping::find(std::string_view node, std::string_view port, Direction dir) const {
  auto it = ports.find(PortKey{std::string(node), std::string(port), dir});
  return it == ports.end() ? nullptr : &it->second;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

namespace {

const std::string kEmpty;

std::string body_of(const NodeInstance& n) {
  auto it = n.config.find("body");
  return it != n.config.end() && it->is_string() ? it->get<std::string>() : kEmpty;
}

/// Resolves every port of a flow, then derives diagnostics on demand for
/// whichever owners the caller asks about.
class Analysis {
 public:
  Analysis(const FlowGraph& flow, const SpecRegistry& registry) : flow_(flow), registry_(registry) {
    index_wires();
    resolve_fixed();
    resolve_inferred();
  }

  FlowTyping typing() const { return FlowTyping{resolved_}; }

  void node_diagnostics(const std::string& id, std::vector<Diagnostic>& out) const {
    const auto& n = flow_.nodes.at(id);
    const auto& spec = registry_.at(n.spec);
    auto add = [&](Severity s, std::string code, std::string message) {
      out.push_back(Diagnostic{s, std::move(code), node_loc(id), std::move(message)});
    };
    if (cyclic_nodes_.count(id)) {
      add(Severity::error, "schema-unresolved", "port schemas depend on themselves through a cycle");
    }
    if (auto it = node_errors_.find(id); it != node_errors_.end()) {
      for (const auto& [code, message] : it->second) add(Severity::error, code, message);
    }
    if (spec.behavior == "function") function_body(n, out);
    if (spec.role != Role::datasource && !spec.inputs.empty() && into_.count(id) == 0) {
      add(Severity::warning, "unwired-input", "no wire feeds this node");
    }
    if (spec.role == Role::output && !reachable().count(id)) {
      add(Severity::warning, "unreachable-output", "no data source reaches this output");
    }
  }

  void wire_diagnostics(const Wire& w, std::vector<Diagnostic>& out) const {
    const auto& consumer = registry_.at(flow_.nodes.at(w.to.node).spec);
    const auto* port = consumer.input(w.to.port);
    if (port->rule.mode == PortRule::Mode::inferred) return;  // accepts whatever its producers join to
    const Schema* p = find(w.from.node, w.from.port, Direction::out);
    const Schema* c = find(w.to.node, w.to.port, Direction::in);
    if (!p || !c) return;
    if (auto compat = is_subtype(*p, *c); !compat) {
      std::string message = describe(*p) + " ⋢ " + describe(*c);
      if (!compat.path.empty() && compat.path != ".") message += " at " + compat.path;
      if (!compat.reason.empty()) message += ": " + compat.reason;
      out.push_back(Diagnostic{Severity::error, "wire-incompatible", wire_loc(w), std::move(message)});
    }
  }

  FunctionSignature signature(const std::string& id) const {
    FunctionSignature sig;
    if (const Schema* in = find(id, "in", Direction::in)) sig.input = *in;
    if (auto c = constraint(id); c && *c) sig.output = **c;
    node_diagnostics(id, sig.diagnostics);
    std::sort(sig.diagnostics.begin(), sig.diagnostics.end());
    return sig;
  }

 private:
  const Schema* find(const std::string& node, const std::string& port, Direction dir) const {
    auto it = resolved_.find(PortKey{node, port, dir});
    return it == resolved_.end() ? nullptr : &it->second;
  }

  void index_wires() {
    for (const auto& w : flow_.wires) {
      into_[w.to.node].push_back(w);
      from_[w.from.node].push_back(w);
    }
  }

  const std::vector<Wire>& wires_into(const std::string& id) const {
    auto it = into_.find(id);
    return it == into_.end() ? none_ : it->second;
  }

  const std::vector<Wire>& wires_from(const std::string& id) const {
    auto it = from_.find(id);
    return it == from_.end() ? none_ : it->second;
  }

  void resolve_fixed() {
    for (const auto& [id, n] : flow_.nodes) {
      const auto& spec = registry_.at(n.spec);
      for (auto dir : {Direction::in, Direction::out}) {
        for (const auto& p : dir == Direction::in ? spec.inputs : spec.outputs) {
          const PortKey key{id, p.name, dir};
          if (p.rule.mode == PortRule::Mode::inferred) {
            inferred_.push_back(key);
          } else if (auto s = resolve_port_schema(n, spec, p.name, dir)) {
            resolved_.emplace(key, std::move(*s));
          }
        }
      }
    }
  }

  /// Schemas of the non-inferred consumers of a function's output, met
  /// together. nullopt: no such consumers. Inner nullopt: they conflict.
  std::optional<std::optional<Schema>> constraint(const std::string& id) const {
    std::optional<std::optional<Schema>> acc;
    for (const auto& w : wires_from(id)) {
      const auto& spec = registry_.at(flow_.nodes.at(w.to.node).spec);
      if (spec.input(w.to.port)->rule.mode == PortRule::Mode::inferred) continue;
      const Schema* c = find(w.to.node, w.to.port, Direction::in);
      if (!acc) {
        acc = *c;
      } else if (*acc) {
        *acc = meet(**acc, *c);
      }
    }
    return acc;
  }

  std::vector<std::size_t> dependencies(std::size_t k, const std::map<PortKey, std::size_t>& index) const {
    const auto& key = inferred_[k];
    std::vector<std::size_t> deps;
    auto add = [&](const PortKey& p) {
      if (auto it = index.find(p); it != index.end()) deps.push_back(it->second);
    };
    if (key.dir == Direction::in) {
      for (const auto& w : wires_into(key.node)) {
        if (w.to.port == key.port) add(PortKey{w.from.node, w.from.port, Direction::out});
      }
      return deps;
    }
    const auto& spec = registry_.at(flow_.nodes.at(key.node).spec);
    if (spec.behavior == "function" && constraint(key.node)) return deps;
    for (const auto& p : spec.inputs) add(PortKey{key.node, p.name, Direction::in});
    return deps;
  }

  void resolve_inferred() {
    std::map<PortKey, std::size_t> index;
    for (std::size_t i = 0; i < inferred_.size(); ++i) index.emplace(inferred_[i], i);
    std::vector<std::vector<std::size_t>> deps(inferred_.size());
    for (std::size_t i = 0; i < inferred_.size(); ++i) deps[i] = dependencies(i, index);

    // Tarjan's algorithm emits each component after everything it depends
    // on, which is exactly the order to resolve in. Iterative to keep deep
    // chains off the call stack.
    const std::size_t n = inferred_.size();
    std::vector<std::size_t> low(n), order(n, SIZE_MAX);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t counter = 0;
    for (std::size_t root = 0; root < n; ++root) {
      if (order[root] != SIZE_MAX) continue;
      std::vector<std::pair<std::size_t, std::size_t>> frames = {{root, 0}};
      order[root] = low[root] = counter++;
      stack.push_back(root);
      on_stack[root] = true;
      while (!frames.empty()) {
        auto& [v, next] = frames.back();
        if (next < deps[v].size()) {
          const std::size_t w = deps[v][next++];
          if (order[w] == SIZE_MAX) {
            order[w] = low[w] = counter++;
            stack.push_back(w);
            on_stack[w] = true;
            frames.push_back({w, 0});
          } else if (on_stack[w]) {
            low[v] = std::min(low[v], order[w]);
          }
          continue;
        }
        if (low[v] == order[v]) {
          std::vector<std::size_t> component;
          std::size_t w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            component.push_back(w);
          } while (w != v);
          const bool cyclic =
              component.size() > 1 || std::find(deps[v].begin(), deps[v].end(), v) != deps[v].end();
          if (cyclic) {
            for (auto c : component) cyclic_nodes_.insert(inferred_[c].node);
          } else {
            resolve(inferred_[v]);
          }
        }
        const std::size_t done = v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      }
    }
  }

  void node_error(const std::string& node, std::string code, std::string message) {
    node_errors_[node].emplace_back(std::move(code), std::move(message));
  }

  void resolve(const PortKey& key) {
    const auto& n = flow_.nodes.at(key.node);
    const auto& spec = registry_.at(n.spec);
    std::optional<Schema> s =
        key.dir == Direction::in ? resolve_input(key, spec) : resolve_output(n, spec);
    if (s) resolved_.emplace(key, std::move(*s));
  }

  std::optional<Schema> resolve_input(const PortKey& key, const NodeSpec& spec) {
    std::optional<Schema> acc;
    bool conflict = false;
    for (const auto& w : wires_into(key.node)) {
      if (w.to.port != key.port) continue;
      const Schema* p = find(w.from.node, w.from.port, Direction::out);
      if (!p) return std::nullopt;
      if (!acc) {
        acc = *p;
      } else if (is_subtype(*p, *acc)) {
        // already covered
      } else if (is_subtype(*acc, *p)) {
        acc = *p;
      } else {
        conflict = true;
        acc = join(*acc, *p);
      }
    }
    if (conflict && spec.behavior == "function") {
      node_error(key.node, "conflicting-producers",
                 "producers of " + key.port + " have incomparable schemas; joined to " + describe(*acc));
    }
    return acc ? acc : Schema::object({}, {});
  }

  std::optional<Schema> resolve_output(const NodeInstance& n, const NodeSpec& spec) {
    std::vector<const Schema*> inputs;
    for (const auto& p : spec.inputs) {
      const Schema* s = find(n.id, p.name, Direction::in);
      if (!s) return std::nullopt;
      inputs.push_back(s);
    }
    if (spec.behavior == "function") {
      if (auto c = constraint(n.id)) {
        if (!*c) node_error(n.id, "conflicting-consumers", "downstream consumers accept no common schema");
        return *c;
      }
      auto typed = check_program(body_of(n), *inputs.front(), std::nullopt);
      if (!typed.ok()) return std::nullopt;
      return typed.result;
    }
    if (spec.behavior == "extract") return project(n, *inputs.front());
    if (spec.behavior == "combine") {
      std::vector<Property> props;
      std::vector<std::string> required;
      for (std::size_t i = 0; i < spec.inputs.size(); ++i) {
        props.push_back(Property{spec.inputs[i].name, *inputs[i]});
        required.push_back(spec.inputs[i].name);
      }
      return Schema::object(std::move(props), std::move(required));
    }
    if (inputs.empty()) return Schema::object({}, {});
    Schema acc = *inputs.front();
    for (std::size_t i = 1; i < inputs.size(); ++i) acc = join(acc, *inputs[i]);
    return acc;
  }

  std::optional<Schema> project(const NodeInstance& n, const Schema& input) {
    if (input.kind != Kind::object) {
      node_error(n.id, "extract-field", "extract needs an object input, found " + describe(input));
      return std::nullopt;
    }
    std::vector<Property> props;
    std::vector<std::string> required;
    bool ok = true;
    for (const auto& f : n.config.value("fields", Value::array())) {
      const auto name = f.get<std::string>();
      const Schema* p = input.property(name);
      if (!p) {
        node_error(n.id, "extract-field", "input has no field " + name);
        ok = false;
        continue;
      }
      if (std::any_of(props.begin(), props.end(), [&](const Property& q) { return q.name == name; })) continue;
      props.push_back(Property{name, *p});
      if (input.is_required(name)) required.push_back(name);
    }
    if (!ok) return std::nullopt;
    return Schema::object(std::move(props), std::move(required));
  }

  void function_body(const NodeInstance& n, std::vector<Diagnostic>& out) const {
    const Schema* in = find(n.id, "in", Direction::in);
    if (!in) return;
    std::optional<Schema> expected;
    if (auto c = constraint(n.id)) {
      if (!*c) return;  // conflicting-consumers already reported
      expected = **c;
    }
    auto typed = check_program(body_of(n), *in, expected);
    if (typed.ok()) return;
    const auto& d = typed.diagnostics.front();
    out.push_back(Diagnostic{Severity::error, "function-body", node_loc(n.id),
                             std::to_string(d.line) + ":" + std::to_string(d.col) + " " + d.code + ": " +
                                 d.message});
  }

  const std::set<std::string>& reachable() const {
    if (!reachable_) {
      std::set<std::string> seeds;
      for (const auto& [id, n] : flow_.nodes) {
        if (registry_.at(n.spec).role == Role::datasource) seeds.insert(id);
      }
      reachable_ = downstream_closure(flow_, seeds);
    }
    return *reachable_;
  }

 public:
  // Trigger fields need the resolved input; checked after resolution.
  void check_triggers() {
    for (const auto& [id, n] : flow_.nodes) {
      if (registry_.at(n.spec).behavior != "trigger") continue;
      const Schema* in = find(id, "in", Direction::in);
      if (!in) continue;
      const auto field = n.config.value("field", std::string());
      const Schema* p = in->kind == Kind::object ? in->property(field) : nullptr;
      if (!p || !in->is_required(field) || (p->kind != Kind::integer && p->kind != Kind::number)) {
        node_error(id, "trigger-field", "input " + describe(*in) + " has no required numeric field " + field);
      }
    }
  }

 private:
  const FlowGraph& flow_;
  const SpecRegistry& registry_;
  std::map<std::string, std::vector<Wire>> into_;
  std::map<std::string, std::vector<Wire>> from_;
  const std::vector<Wire> none_;
  std::vector<PortKey> inferred_;
  std::map<PortKey, Schema> resolved_;
  std::set<std::string> cyclic_nodes_;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> node_errors_;
  mutable std::optional<std::set<std::string>> reachable_;
};

std::vector<Diagnostic> collect(const FlowGraph& flow, const SpecRegistry& registry,
                                const std::function<bool(const std::string&)>& want_node,
                                const std::function<bool(const Wire&)>& want_wire) {
  Analysis a(flow, registry);
  a.check_triggers();
  std::vector<Diagnostic> out;
  for (const auto& [id, n] : flow.nodes) {
    if (want_node(id)) a.node_diagnostics(id, out);
  }
  for (const auto& w : flow.wires) {
    if (want_wire(w)) a.wire_diagnostics(w, out);
  }
  return out;
}

}  // namespace

FlowTyping type_flow(const FlowGraph& flow, const SpecRegistry& registry) {
  return Analysis(flow, registry).typing();
}

std::vector<Diagnostic> check_flow(const FlowGraph& flow, const SpecRegistry& registry) {
  auto out = collect(
      flow, registry, [](const std::string&) { return true; }, [](const Wire&) { return true; });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Diagnostic> recheck_after_edit(const FlowGraph& flow, const ChangedSet& changed,
                                           const std::vector<Diagnostic>& previous,
                                           const SpecRegistry& registry) {
  // Which owner each location string names in the edited graph; locations
  // of removed nodes and wires are absent and their diagnostics dropped.
  std::map<std::string, bool> stale;
  for (const auto& [id, n] : flow.nodes) stale.emplace(node_loc(id), changed.nodes.count(id) != 0);
  for (const auto& w : flow.wires) stale.emplace(wire_loc(w), changed.touches(w));

  std::vector<Diagnostic> out;
  for (const auto& d : previous) {
    auto it = stale.find(d.loc);
    if (it != stale.end() && !it->second) out.push_back(d);
  }
  auto fresh = collect(
      flow, registry, [&](const std::string& id) { return changed.nodes.count(id) != 0; },
      [&](const Wire& w) { return changed.touches(w); });
  out.insert(out.end(), fresh.begin(), fresh.end());
  std::sort(out.begin(), out.end());
  return out;
}

FunctionSignature function_signature(const FlowGraph& flow, const SpecRegistry& registry, const std::string& node) {
  auto it = flow.nodes.find(node);
  if (it == flow.nodes.end() || registry.at(it->second.spec).behavior != "function") {
    throw Error(Errc::unknown_node, node_loc(node), "no function node " + node);
  }
  Analysis a(flow, registry);
  a.check_triggers();
  return a.signature(node);
}

}  // namespace privflow
