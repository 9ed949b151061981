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

// Development-time checks over a flow: wire compatibility, function bodies,
// and dead or unwired nodes.
//
// Diagnostic locations are "node:<id>" or "wire:<from.port>-><to.port>".
// Every diagnostic is owned by exactly one node or wire, which is what lets
// recheck_after_edit recompute only the owners an edit could affect.

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "privflow/flow.hpp"

namespace privflow {

enum class Severity { info, warning, error };

std::string_view to_string(Severity s) noexcept;
Severity severity_from_string(std::string_view s);

struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string loc;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
  friend bool operator<(const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.loc, a.code, a.message, a.severity) < std::tie(b.loc, b.code, b.message, b.severity);
  }
};

std::string node_loc(std::string_view node);
std::string wire_loc(const Wire& w);

Value diagnostic_to_json(const Diagnostic& d);
Diagnostic diagnostic_from_json(const Value& doc);

struct PortKey {
  std::string node;
  std::string port;
  Direction dir = Direction::in;

  auto operator<=>(const PortKey&) const = default;
};

/// Schemas of every port after inference. A port missing from `ports` could
/// not be resolved (it sits on a cycle, or something upstream failed).
struct FlowTyping {
  std::map<PortKey, Schema> ports;

  const Schema* find(std::string_view node, std::string_view port, Direction dir) const;
};

FlowTyping type_flow(const FlowGraph& flow, const SpecRegistry& registry);

/// Diagnostics in canonical order. Empty flow, empty list.
std::vector<Diagnostic> check_flow(const FlowGraph& flow, const SpecRegistry& registry);

/// `flow` is the graph after the edit and `changed` the set apply_edit
/// reported. Diagnostics owned by nodes and wires outside the changed set
/// are carried over from `previous`; the rest are recomputed.
std::vector<Diagnostic> recheck_after_edit(const FlowGraph& flow, const ChangedSet& changed,
                                           const std::vector<Diagnostic>& previous,
                                           const SpecRegistry& registry);

struct FunctionSignature {
  std::optional<Schema> input;   // nullopt: unresolved
  std::optional<Schema> output;  // nullopt: unconstrained
  std::vector<Diagnostic> diagnostics;
};

/// Throws Error(unknown_node) when `node` is missing or not a function node.
FunctionSignature function_signature(const FlowGraph& flow, const SpecRegistry& registry,
                                     const std::string& node);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

}  // namespace privflow
