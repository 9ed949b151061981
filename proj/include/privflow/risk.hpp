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

// Risk on a 0..5 integer scale. A node starts at the low end of its
// declared spectrum and each factor adds a fixed increment:
//
//   exports off-box +2, physical actuation +2, insecure hardware +1,
//   unverified code +1, then clamp to the spectrum.
//
// The app takes the highest node score, one more (capped at 5) when an
// exporting node receives sensitive or identifier data.

#include <string>
#include <vector>

#include "privflow/checker.hpp"
#include "privflow/taint.hpp"

namespace privflow {

struct RiskFactors {
  bool exports_off_box = false;
  bool physical_actuation = false;
  bool insecure_hardware = false;
  bool unverified_code = false;

  friend bool operator==(const RiskFactors&, const RiskFactors&) = default;
};

struct NodeRisk {
  std::string id;
  int score = 0;
  int lo = 0;
  int hi = 0;
  RiskFactors factors;

  friend bool operator==(const NodeRisk&, const NodeRisk&) = default;
};

struct RiskRating {
  int score = 0;
  std::string band = "low";
  std::vector<NodeRisk> nodes;  // by node id

  friend bool operator==(const RiskRating&, const RiskRating&) = default;
};

int effective_score(int lo, int hi, const RiskFactors& f);
int app_score(const std::vector<int>& node_scores, bool sensitive_export);
std::string risk_band(int score);

/// `diagnostics` decide unverified_code: a function node with a
/// function-body diagnostic counts as unverified.
RiskFactors risk_factors(const NodeSpec& spec, const NodeInstance& node, const std::vector<Diagnostic>& diagnostics);

NodeRisk node_risk(const NodeSpec& spec, const NodeInstance& node, const RiskFactors& factors);

RiskRating app_risk(const FlowGraph& flow, const LabelMap& labels, std::vector<NodeRisk> nodes);

/// Factors, node scores and app rating in one pass.
RiskRating assess_risk(const FlowGraph& flow, const SpecRegistry& registry, const LabelMap& labels,
                       const std::vector<Diagnostic>& diagnostics);

/// {app: {score, band}, nodes: [{id, score, spectrum, factors}]}
Value risk_to_json(const RiskRating& r);
RiskRating risk_from_json(const Value& doc);

}  // namespace privflow
