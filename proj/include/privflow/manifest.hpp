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

// App manifest: what the flow reads, where its data goes, the personal data
// involved, the risk rating and the controller's statutory notice.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "privflow/risk.hpp"
#include "privflow/taint.hpp"

namespace privflow {

struct Statutory {
  std::string controller;  // contact for the data controller
  std::string purpose;
  std::string retention;
  std::string rights;  // data-subject rights notice

  friend bool operator==(const Statutory&, const Statutory&) = default;
};

/// Developer-supplied prose that the flow itself cannot tell us.
struct ManifestMeta {
  std::string description;
  std::string benefits;
  std::map<std::string, std::string> purposes;  // datasource node id -> why it is read
  Statutory statutory;
};

ManifestMeta meta_from_json(const Value& doc);

struct DatasourceEntry {
  std::string node;
  std::string spec;
  std::string purpose;
  std::optional<std::int64_t> period_ms;
  std::vector<std::int64_t> period_options;
  PersonalLabel atoms;

  friend bool operator==(const DatasourceEntry&, const DatasourceEntry&) = default;
};

struct OutputEntry {
  std::string node;
  std::string spec;
  PersonalLabel atoms;

  friend bool operator==(const OutputEntry&, const OutputEntry&) = default;
};

struct ExportEntry {
  std::string node;
  std::string destination;
  bool off_box = false;
  PersonalLabel atoms;

  friend bool operator==(const ExportEntry&, const ExportEntry&) = default;
};

struct ActuationEntry {
  std::string node;
  std::string device;

  friend bool operator==(const ActuationEntry&, const ActuationEntry&) = default;
};

struct Manifest {
  struct App {
    std::string id;
    std::string name;
    std::string version;
    std::string author;

    friend bool operator==(const App&, const App&) = default;
  };
  struct Layers {
    std::string summary;
    std::string detail;

    friend bool operator==(const Layers&, const Layers&) = default;
  };

  App app;
  std::string description;
  std::string benefits;
  std::vector<DatasourceEntry> datasources;  // each list ordered by node id
  std::vector<OutputEntry> outputs;
  std::vector<ExportEntry> exports;
  std::vector<ActuationEntry> actuations;
  RiskRating risk;
  Statutory statutory;
  Layers layers;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Names of the empty statutory fields, in declaration order.
std::vector<std::string> missing_statutory_fields(const Statutory& s);

/// Throws Error(missing_statutory_field) listing every empty field.
Manifest build_manifest(const FlowGraph& flow, const SpecRegistry& registry, const LabelMap& labels,
                        const RiskRating& risk, const ManifestMeta& meta);

/// "<name> reads <n> data source(s), sends data off-box: <yes/no>, risk: <band>."
std::string layer_one_summary(const Manifest& m);

OrderedValue manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const Value& doc);

/// Canonical bytes: fixed field order, 2-space indent, LF, trailing newline.
std::string serialize_manifest(const Manifest& m);
/// Throws Error(parse_error) with a byte or field location, or
/// Error(missing_statutory_field).
Manifest parse_manifest(std::string_view bytes);

}  // namespace privflow
