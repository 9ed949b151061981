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

#include "privflow/taint.hpp"

#include <algorithm>
#include <deque>

#include "privflow/error.hpp"

namespace privflow {

namespace {

bool has_tag(const PersonalLabel& label, const std::string& tag) {
  return std::any_of(label.begin(), label.end(), [&](const PersonalAtom& a) { return a.tag == tag; });
}

bool condition_active(const Condition& c, const Value& config, const PersonalLabel& context) {
  if (c.kind == Condition::Kind::requires_atom) return has_tag(context, c.tag);
  auto it = config.find("period_ms");
  return it != config.end() && it->is_number_integer() && it->get<std::int64_t>() <= c.period_ms;
}

/// Declared atoms that apply under `config`. Secondary atoms see the input
/// label plus the primary atoms this port emits.
PersonalLabel active_atoms(const std::vector<AtomDecl>& decls, const Value& config, const PersonalLabel& input) {
  PersonalLabel primary;
  for (const auto& d : decls) {
    if (d.atom.derivation == Derivation::primary && (!d.when || d.when->holds(config))) primary.insert(d.atom);
  }
  PersonalLabel context = input;
  context.insert(primary.begin(), primary.end());
  PersonalLabel out = primary;
  for (const auto& d : decls) {
    if (d.atom.derivation != Derivation::secondary || (d.when && !d.when->holds(config))) continue;
    const bool all = std::all_of(d.atom.conditions.begin(), d.atom.conditions.end(),
                                 [&](const Condition& c) { return condition_active(c, config, context); });
    if (all) out.insert(d.atom);
  }
  return out;
}

std::set<std::string> dropped(const LabelTransfer& t, const Value& config) {
  std::set<std::string> out(t.drop.begin(), t.drop.end());
  if (!t.drop_config_key.empty() && config.is_object()) {
    auto it = config.find(t.drop_config_key);
    if (it != config.end() && it->is_array()) {
      for (const auto& v : *it) {
        if (v.is_string()) out.insert(v.get<std::string>());
      }
    }
  }
  return out;
}

}  // namespace

std::map<std::string, PersonalLabel> node_transfer(const NodeSpec& spec, const Value& config,
                                                   const PersonalLabel& input) {
  std::map<std::string, PersonalLabel> out;
  for (const auto& port : spec.outputs) {
    const auto& t = port.transfer;
    PersonalLabel label;
    switch (t.kind) {
      case LabelTransfer::Kind::emit:
        label = active_atoms(t.atoms, config, input);
        break;
      case LabelTransfer::Kind::passthrough_plus: {
        label = input;
        auto extra = active_atoms(t.atoms, config, input);
        label.insert(extra.begin(), extra.end());
        break;
      }
      case LabelTransfer::Kind::filter: {
        const auto drop = dropped(t, config);
        for (const auto& a : input) {
          if (!drop.count(std::string(to_string(a.category))) && !drop.count(a.tag)) label.insert(a);
        }
        auto extra = active_atoms(t.atoms, config, input);
        label.insert(extra.begin(), extra.end());
        break;
      }
      case LabelTransfer::Kind::clear:
        break;
    }
    out.emplace(port.name, std::move(label));
  }
  return out;
}

PersonalLabel input_label(const FlowGraph& flow, const LabelMap& labels, const std::string& node) {
  PersonalLabel out;
  for (const auto& w : flow.wires_into(node)) {
    auto it = labels.find(w);
    if (it != labels.end()) out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

LabelMap propagate_labels(const FlowGraph& flow, const SpecRegistry& registry) {
  LabelMap labels;
  std::map<std::string, std::vector<Wire>> into;
  std::map<std::string, std::vector<Wire>> from;
  for (const auto& w : flow.wires) {
    labels.emplace(w, PersonalLabel{});
    into[w.to.node].push_back(w);
    from[w.from.node].push_back(w);
  }

  std::deque<std::string> work;
  std::set<std::string> queued;
  for (const auto& [id, n] : flow.nodes) {
    work.push_back(id);
    queued.insert(id);
  }
  while (!work.empty()) {
    const std::string id = work.front();
    work.pop_front();
    queued.erase(id);
    const auto& n = flow.nodes.at(id);
    PersonalLabel input;
    for (const auto& w : into[id]) input.insert(labels[w].begin(), labels[w].end());
    const auto outs = node_transfer(registry.at(n.spec), n.config, input);
    for (const auto& w : from[id]) {
      auto& label = labels[w];
      const auto& next = outs.at(w.from.port);
      const auto before = label.size();
      label.insert(next.begin(), next.end());
      if (label.size() != before && queued.insert(w.to.node).second) work.push_back(w.to.node);
    }
  }
  return labels;
}

std::map<Wire, LabelDelta> diff_labels(const LabelMap& before, const LabelMap& after) {
  std::map<Wire, LabelDelta> out;
  const PersonalLabel empty;
  std::set<Wire> wires;
  for (const auto& [w, l] : before) wires.insert(w);
  for (const auto& [w, l] : after) wires.insert(w);
  for (const auto& w : wires) {
    auto b = before.find(w);
    auto a = after.find(w);
    const auto& old_label = b == before.end() ? empty : b->second;
    const auto& new_label = a == after.end() ? empty : a->second;
    LabelDelta d;
    std::set_difference(new_label.begin(), new_label.end(), old_label.begin(), old_label.end(),
                        std::inserter(d.added, d.added.end()));
    std::set_difference(old_label.begin(), old_label.end(), new_label.begin(), new_label.end(),
                        std::inserter(d.removed, d.removed.end()));
    if (!d.added.empty() || !d.removed.empty()) out.emplace(w, std::move(d));
  }
  return out;
}

PersonalLabel source_label(const NodeSpec& spec, const NodeInstance& node) {
  PersonalLabel out;
  for (auto& [port, label] : node_transfer(spec, node.config, {})) out.insert(label.begin(), label.end());
  return out;
}

PersonalSummary summarize_personal_data(const FlowGraph& flow, const SpecRegistry& registry,
                                        const LabelMap& labels) {
  PersonalSummary s;
  for (const auto& [id, n] : flow.nodes) {
    const auto& spec = registry.at(n.spec);
    if (spec.role == Role::output || spec.risk.exports_off_box) {
      auto in = input_label(flow, labels, id);
      s.app.insert(in.begin(), in.end());
      if (spec.role == Role::output) s.outputs.emplace(id, in);
      if (spec.risk.exports_off_box) s.exports.emplace(id, std::move(in));
    }
  }
  return s;
}

Value labels_to_json(const LabelMap& labels) {
  Value wires = Value::array();
  for (const auto& [w, label] : labels) {
    Value entry = wire_to_json(w);
    entry["atoms"] = label_to_json(label);
    wires.push_back(std::move(entry));
  }
  return Value{{"wires", std::move(wires)}};
}

LabelMap labels_from_json(const Value& doc) {
  if (!doc.is_object() || !doc.contains("wires") || !doc["wires"].is_array()) {
    throw Error(Errc::parse_error, "", "label map needs a \"wires\" array");
  }
  LabelMap out;
  for (const auto& entry : doc["wires"]) {
    if (!entry.is_object()) throw Error(Errc::parse_error, "", "label entry must be an object");
    Value wire = Value::object();
    for (const char* key : {"from", "to"}) {
      if (entry.contains(key)) wire[key] = entry[key];
    }
    out[wire_from_json(wire)] = label_from_json(entry.value("atoms", Value::array()));
  }
  return out;
}

}  // namespace privflow
