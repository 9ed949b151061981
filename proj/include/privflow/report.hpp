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

// Everything the static analyses say about one flow. `privflow check
// --format json` and the dev server's validate endpoint both print
// report_to_json, so the two cannot drift apart.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "privflow/checker.hpp"
#include "privflow/risk.hpp"
#include "privflow/taint.hpp"

namespace privflow {

struct SignatureInfo {
  std::optional<Schema> input;
  std::optional<Schema> output;

  friend bool operator==(const SignatureInfo&, const SignatureInfo&) = default;
};

struct CheckReport {
  std::vector<Diagnostic> diagnostics;
  LabelMap labels;
  RiskRating risk;
  std::map<std::string, SignatureInfo> signatures;  // function nodes
  std::map<std::string, std::string> skeletons;     // function nodes with a resolved input

  friend bool operator==(const CheckReport&, const CheckReport&) = default;
};

CheckReport check_report(const FlowGraph& flow, const SpecRegistry& registry);

OrderedValue report_to_json(const CheckReport& r);
CheckReport report_from_json(const Value& doc);

/// Human-readable form: diagnostics, then wire labels, then risk.
std::string report_to_text(const CheckReport& r);

}  // namespace privflow
