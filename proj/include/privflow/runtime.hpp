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

// Deterministic execution of a checked flow on a virtual clock.
//
// Datasources with period p tick at p, 2p, ... up to the session duration
// and emit mock values. Delivery along a wire takes no virtual time; events
// run in (time, sequence) order, so the same flow, seed, duration and
// profiles always give the same provenance log.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "privflow/checker.hpp"
#include "privflow/expr.hpp"

namespace privflow {

struct ProvenanceRecord {
  enum class Kind { emit, consume, fault };

  Kind kind = Kind::emit;
  std::string msg;   // message id, "<seed>:<sequence>"
  std::string node;
  std::string port;
  std::int64_t t = 0;
  Value payload;     // faults carry {error, message}
  std::vector<std::string> parents;

  friend bool operator==(const ProvenanceRecord&, const ProvenanceRecord&) = default;
};

std::string_view to_string(ProvenanceRecord::Kind k) noexcept;

/// One record as a JSON object with keys in the order
/// kind, msg, node, port, t, payload, parents.
OrderedValue record_to_json(const ProvenanceRecord& r);
ProvenanceRecord record_from_json(const Value& doc);

/// JSON Lines, one compact record per line.
std::string log_to_jsonl(const std::vector<ProvenanceRecord>& log);
/// Throws Error(parse_error) naming the offending line.
std::vector<ProvenanceRecord> parse_jsonl(std::string_view text);

struct RunOptions {
  std::uint64_t seed = 0;
  std::int64_t duration_ms = 0;
  std::map<std::string, std::string> profiles;  // datasource node id -> profile name
  /// Deliveries allowed at one virtual instant before a loop is declared.
  std::size_t instant_limit = 10000;
};

struct RunResult {
  std::vector<ProvenanceRecord> log;
  std::map<std::string, std::vector<Value>> outputs;  // payloads received per output node
  std::map<std::string, std::size_t> firings;         // true emissions per trigger node
  std::size_t faults = 0;
};

/// Summary counts as printed by `privflow run`.
OrderedValue run_summary_to_json(const RunResult& r);

class Session {
 public:
  /// Throws Error(refuse_to_run) when the flow has check errors and
  /// Error(unknown_profile | unknown_node) for a bad profile assignment.
  Session(FlowGraph flow, const SpecRegistry& registry, RunOptions options);
  ~Session();
  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;

  bool done() const;
  /// Runs the next scheduled event and returns the number of records it
  /// appended. Does nothing once done().
  std::size_t step();
  void run();

  const std::vector<ProvenanceRecord>& log() const;
  RunResult result() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

RunResult start_session(const FlowGraph& flow, const SpecRegistry& registry, const RunOptions& options);

/// Same as start_session; named for call sites that reproduce a prior run.
RunResult replay(const FlowGraph& flow, const SpecRegistry& registry, const RunOptions& options);

struct LineageNode {
  ProvenanceRecord record;  // the emit record of the message
  std::vector<LineageNode> parents;

  friend bool operator==(const LineageNode&, const LineageNode&) = default;
};

/// Ancestor tree of `msg`. Throws Error(unknown_message).
LineageNode lineage(const std::vector<ProvenanceRecord>& log, const std::string& msg);

/// {msg, node, port, t, parents: [...]}
OrderedValue lineage_to_json(const LineageNode& n);

/// Records of `node` with t in [from, to], in log order. Throws
/// Error(unknown_node) when no record mentions `node` and Error(parse_error)
/// when from > to.
std::vector<ProvenanceRecord> window(const std::vector<ProvenanceRecord>& log, const std::string& node,
                                     std::int64_t from, std::int64_t to);

}  // namespace privflow
