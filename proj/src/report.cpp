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

#include "privflow/report.hpp"

#include <sstream>

#include "privflow/error.hpp"
#include "privflow/expr.hpp"

namespace privflow {

CheckReport check_report(const FlowGraph& flow, const SpecRegistry& registry) {
  CheckReport r;
  r.diagnostics = check_flow(flow, registry);
  r.labels = propagate_labels(flow, registry);
  r.risk = assess_risk(flow, registry, r.labels, r.diagnostics);
  for (const auto& [id, n] : flow.nodes) {
    if (registry.at(n.spec).behavior != "function") continue;
    auto sig = function_signature(flow, registry, id);
    if (sig.input) r.skeletons[id] = generate_skeleton(*sig.input, sig.output);
    r.signatures[id] = {std::move(sig.input), std::move(sig.output)};
  }
  return r;
}

namespace {

OrderedValue optional_schema(const std::optional<Schema>& s) {
  return s ? to_ordered(schema_to_json(*s)) : OrderedValue(nullptr);
}

std::optional<Schema> optional_schema(const Value& v) {
  if (v.is_null()) return std::nullopt;
  return schema_from_json(v);
}

}  // namespace

OrderedValue report_to_json(const CheckReport& r) {
  OrderedValue doc = OrderedValue::object();
  std::size_t errors = 0;
  std::size_t warnings = 0;
  doc["diagnostics"] = OrderedValue::array();
  for (const auto& d : r.diagnostics) {
    errors += d.severity == Severity::error;
    warnings += d.severity == Severity::warning;
    doc["diagnostics"].push_back(to_ordered(diagnostic_to_json(d)));
  }
  doc["summary"] = {{"errors", errors}, {"warnings", warnings}};
  doc["labels"] = to_ordered(labels_to_json(r.labels));
  doc["risk"] = to_ordered(risk_to_json(r.risk));
  doc["signatures"] = OrderedValue::object();
  for (const auto& [id, s] : r.signatures) {
    doc["signatures"][id] = {{"input", optional_schema(s.input)}, {"output", optional_schema(s.output)}};
  }
  doc["skeletons"] = OrderedValue::object();
  for (const auto& [id, text] : r.skeletons) doc["skeletons"][id] = text;
  return doc;
}

CheckReport report_from_json(const Value& doc) {
  try {
    CheckReport r;
    for (const auto& d : doc.at("diagnostics")) r.diagnostics.push_back(diagnostic_from_json(d));
    r.labels = labels_from_json(doc.at("labels"));
    r.risk = risk_from_json(doc.at("risk"));
    for (const auto& [id, s] : doc.at("signatures").items()) {
      r.signatures[id] = {optional_schema(s.at("input")), optional_schema(s.at("output"))};
    }
    for (const auto& [id, text] : doc.at("skeletons").items()) r.skeletons[id] = text.get<std::string>();
    return r;
  } catch (const Value::exception& e) {
    throw Error(Errc::parse_error, "report", e.what());
  }
}

std::string report_to_text(const CheckReport& r) {
  std::ostringstream os;
  if (r.diagnostics.empty()) os << "no diagnostics\n";
  for (const auto& d : r.diagnostics) {
    os << to_string(d.severity) << " " << d.loc << " " << d.code << ": " << d.message << "\n";
  }
  os << "\nlabels:\n";
  if (r.labels.empty()) os << "  (no wires)\n";
  for (const auto& [w, label] : r.labels) {
    os << "  " << to_string(w) << " [" << badges(label) << "]";
    for (const auto& a : label) os << " " << to_string(a.category) << ":" << a.tag;
    os << "\n";
  }
  os << "\nrisk: " << r.risk.band << " (" << r.risk.score << "/5)\n";
  for (const auto& n : r.risk.nodes) {
    os << "  " << n.id << " " << n.score << " in [" << n.lo << "," << n.hi << "]";
    if (n.factors.exports_off_box) os << " exports-off-box";
    if (n.factors.physical_actuation) os << " physical-actuation";
    if (n.factors.insecure_hardware) os << " insecure-hardware";
    if (n.factors.unverified_code) os << " unverified-code";
    os << "\n";
  }
  return os.str();
}

}  // namespace privflow
