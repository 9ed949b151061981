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

#include "privflow/risk.hpp"

#include <algorithm>

#include "privflow/error.hpp"

namespace privflow {

int effective_score(int lo, int hi, const RiskFactors& f) {
  const int raw = lo + 2 * f.exports_off_box + 2 * f.physical_actuation + f.insecure_hardware + f.unverified_code;
  return std::clamp(raw, lo, hi);
}

int app_score(const std::vector<int>& node_scores, bool sensitive_export) {
  int score = 0;
  for (int s : node_scores) score = std::max(score, s);
  return sensitive_export ? std::min(score + 1, 5) : score;
}

std::string risk_band(int score) {
  if (score <= 1) return "low";
  if (score <= 3) return "medium";
  return "high";
}

RiskFactors risk_factors(const NodeSpec& spec, const NodeInstance& node, const std::vector<Diagnostic>& diagnostics) {
  RiskFactors f;
  f.exports_off_box = spec.risk.exports_off_box && spec.risk.exports_off_box->holds(node.config);
  f.physical_actuation = spec.risk.physical_actuation && spec.risk.physical_actuation->holds(node.config);
  f.insecure_hardware = spec.risk.insecure_hardware;
  if (spec.behavior == "function") {
    const auto loc = node_loc(node.id);
    f.unverified_code = std::any_of(diagnostics.begin(), diagnostics.end(), [&](const Diagnostic& d) {
      return d.loc == loc && d.code == "function-body";
    });
  }
  return f;
}

NodeRisk node_risk(const NodeSpec& spec, const NodeInstance& node, const RiskFactors& factors) {
  return NodeRisk{node.id, effective_score(spec.risk.lo, spec.risk.hi, factors), spec.risk.lo, spec.risk.hi,
                  factors};
}

RiskRating app_risk(const FlowGraph& flow, const LabelMap& labels, std::vector<NodeRisk> nodes) {
  std::sort(nodes.begin(), nodes.end(), [](const NodeRisk& a, const NodeRisk& b) { return a.id < b.id; });
  std::vector<int> scores;
  bool sensitive_export = false;
  for (const auto& n : nodes) {
    scores.push_back(n.score);
    if (!n.factors.exports_off_box) continue;
    for (const auto& a : input_label(flow, labels, n.id)) {
      if (a.category == Category::sensitive || a.category == Category::identifier) sensitive_export = true;
    }
  }
  RiskRating r;
  r.score = app_score(scores, sensitive_export);
  r.band = risk_band(r.score);
  r.nodes = std::move(nodes);
  return r;
}

RiskRating assess_risk(const FlowGraph& flow, const SpecRegistry& registry, const LabelMap& labels,
                       const std::vector<Diagnostic>& diagnostics) {
  std::vector<NodeRisk> nodes;
  for (const auto& [id, n] : flow.nodes) {
    const auto& spec = registry.at(n.spec);
    nodes.push_back(node_risk(spec, n, risk_factors(spec, n, diagnostics)));
  }
  return app_risk(flow, labels, std::move(nodes));
}

Value risk_to_json(const RiskRating& r) {
  Value nodes = Value::array();
  for (const auto& n : r.nodes) {
    nodes.push_back(Value{{"id", n.id},
                          {"score", n.score},
                          {"spectrum", {n.lo, n.hi}},
                          {"factors",
                           {{"exports_off_box", n.factors.exports_off_box},
                            {"physical_actuation", n.factors.physical_actuation},
                            {"insecure_hardware", n.factors.insecure_hardware},
                            {"unverified_code", n.factors.unverified_code}}}});
  }
  return Value{{"app", {{"score", r.score}, {"band", r.band}}}, {"nodes", std::move(nodes)}};
}

RiskRating risk_from_json(const Value& doc) {
  try {
    RiskRating r;
    r.score = doc.at("app").at("score").get<int>();
    r.band = doc.at("app").at("band").get<std::string>();
    for (const auto& n : doc.at("nodes")) {
      NodeRisk nr;
      nr.id = n.at("id").get<std::string>();
      nr.score = n.at("score").get<int>();
      nr.lo = n.at("spectrum").at(0).get<int>();
      nr.hi = n.at("spectrum").at(1).get<int>();
      const auto& f = n.at("factors");
      nr.factors = RiskFactors{f.at("exports_off_box").get<bool>(), f.at("physical_actuation").get<bool>(),
                               f.at("insecure_hardware").get<bool>(), f.at("unverified_code").get<bool>()};
      r.nodes.push_back(std::move(nr));
    }
    return r;
  } catch (const Value::exception& e) {
    throw Error(Errc::parse_error, "risk", e.what());
  }
}

}  // namespace privflow
