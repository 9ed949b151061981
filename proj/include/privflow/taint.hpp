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

// Forward dataflow over personal-data labels. Every wire gets the least
// label consistent with the per-node transfers; union is the join.

#include <map>
#include <string>

#include "privflow/flow.hpp"
#include "privflow/labels.hpp"

namespace privflow {

using LabelMap = std::map<Wire, PersonalLabel>;

/// Output label per output port of `spec` for a node configured with
/// `config` whose inputs carry `input`.
std::map<std::string, PersonalLabel> node_transfer(const NodeSpec& spec, const Value& config,
                                                   const PersonalLabel& input);

/// Least fixpoint; every wire of the flow has an entry.
LabelMap propagate_labels(const FlowGraph& flow, const SpecRegistry& registry);

/// Union of the labels on the wires entering `node`.
PersonalLabel input_label(const FlowGraph& flow, const LabelMap& labels, const std::string& node);

struct LabelDelta {
  PersonalLabel added;
  PersonalLabel removed;

  friend bool operator==(const LabelDelta&, const LabelDelta&) = default;
};

/// Per-wire set differences; wires with nothing added or removed are left
/// out. A wire present on one side only counts as all-added or all-removed.
std::map<Wire, LabelDelta> diff_labels(const LabelMap& before, const LabelMap& after);

struct PersonalSummary {
  std::map<std::string, PersonalLabel> outputs;  // every output-role node
  std::map<std::string, PersonalLabel> exports;  // nodes whose spec can export off-box
  PersonalLabel app;                             // union of the two maps above

  friend bool operator==(const PersonalSummary&, const PersonalSummary&) = default;
};

/// What a datasource emits before anything downstream touches it.
PersonalLabel source_label(const NodeSpec& spec, const NodeInstance& node);

PersonalSummary summarize_personal_data(const FlowGraph& flow, const SpecRegistry& registry,
                                        const LabelMap& labels);

/// {"wires": [{from, to, atoms}]} in wire order.
Value labels_to_json(const LabelMap& labels);
LabelMap labels_from_json(const Value& doc);

}  // namespace privflow
