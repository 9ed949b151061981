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

#include "privflow/runtime.hpp"

#include <functional>

#include "privflow/error.hpp"

namespace privflow {

std::string_view to_string(ProvenanceRecord::Kind k) noexcept {
  switch (k) {
    case ProvenanceRecord::Kind::emit: return "emit";
    case ProvenanceRecord::Kind::consume: return "consume";
    case ProvenanceRecord::Kind::fault: return "fault";
  }
  return "emit";
}

OrderedValue record_to_json(const ProvenanceRecord& r) {
  OrderedValue doc = OrderedValue::object();
  doc["kind"] = std::string(to_string(r.kind));
  doc["msg"] = r.msg;
  doc["node"] = r.node;
  doc["port"] = r.port;
  doc["t"] = r.t;
  doc["payload"] = to_ordered(r.payload);
  doc["parents"] = r.parents;
  return doc;
}

ProvenanceRecord record_from_json(const Value& doc) {
  try {
    ProvenanceRecord r;
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "emit") r.kind = ProvenanceRecord::Kind::emit;
    else if (kind == "consume") r.kind = ProvenanceRecord::Kind::consume;
    else if (kind == "fault") r.kind = ProvenanceRecord::Kind::fault;
    else throw Error(Errc::parse_error, "kind", "unknown record kind \"" + kind + "\"");
    r.msg = doc.at("msg").get<std::string>();
    r.node = doc.at("node").get<std::string>();
    r.port = doc.at("port").get<std::string>();
    r.t = doc.at("t").get<std::int64_t>();
    r.payload = doc.at("payload");
    r.parents = doc.at("parents").get<std::vector<std::string>>();
    return r;
  } catch (const Value::exception& e) {
    throw Error(Errc::parse_error, "record", e.what());
  }
}

std::string log_to_jsonl(const std::vector<ProvenanceRecord>& log) {
  std::string out;
  for (const auto& r : log) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<ProvenanceRecord> parse_jsonl(std::string_view text) {
  std::vector<ProvenanceRecord> out;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto body = text.substr(pos, end - pos);
    ++line;
    pos = end + 1;
    if (body.empty()) continue;
    try {
      out.push_back(record_from_json(Value::parse(body)));
    } catch (const Value::exception& e) {
      throw Error(Errc::parse_error, "line " + std::to_string(line), e.what());
    } catch (const Error& e) {
      throw Error(Errc::parse_error, "line " + std::to_string(line), e.what());
    }
  }
  return out;
}

OrderedValue run_summary_to_json(const RunResult& r) {
  std::size_t emitted = 0;
  std::size_t consumed = 0;
  for (const auto& rec : r.log) {
    emitted += rec.kind == ProvenanceRecord::Kind::emit;
    consumed += rec.kind == ProvenanceRecord::Kind::consume;
  }
  OrderedValue doc = OrderedValue::object();
  doc["records"] = r.log.size();
  doc["emitted"] = emitted;
  doc["consumed"] = consumed;
  doc["faults"] = r.faults;
  doc["outputs"] = OrderedValue::object();
  for (const auto& [id, payloads] : r.outputs) doc["outputs"][id] = payloads.size();
  doc["firings"] = OrderedValue::object();
  for (const auto& [id, n] : r.firings) doc["firings"][id] = n;
  return doc;
}

// ---------------------------------------------------------------------------
// Session

namespace {

struct Event {
  std::int64_t t = 0;
  std::uint64_t seq = 0;
  bool tick = false;  // datasource tick, else a delivery
  std::string node;   // tick: the datasource
  std::string msg;    // delivery: message id
  Wire wire;
  Value payload;

  bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
};

struct NodeState {
  const NodeInstance* node = nullptr;
  const NodeSpec* spec = nullptr;
  std::int64_t period = 0;
  const ValueProfile* profile = nullptr;
  std::optional<TypedProgram> program;
  bool trigger_on = false;
  std::uint64_t count = 0;
  std::map<std::string, std::pair<std::string, Value>> latest;  // combine: port -> (msg, payload)
};

struct Fault {
  std::string code;
  std::string message;
};

bool compare(double lhs, const std::string& op, double rhs) {
  if (op == ">") return lhs > rhs;
  if (op == ">=") return lhs >= rhs;
  if (op == "<") return lhs < rhs;
  if (op == "<=") return lhs <= rhs;
  if (op == "==") return lhs == rhs;
  return lhs != rhs;
}

Value chart_values(const std::string& input, const Value& payload) {
  Value values = Value::array();
  if (input == "scalar") {
    values.push_back(payload);
  } else if (input == "light") {
    values.push_back(payload.at("lux"));
  } else if (input == "xyz") {
    for (const char* k : {"x", "y", "z"}) values.push_back(payload.at(k));
  } else {
    values.push_back(payload.size());
  }
  return values;
}

}  // namespace

struct Session::State {
  FlowGraph flow;
  const SpecRegistry* registry = nullptr;
  RunOptions options;
  FlowTyping typing;
  Rng rng;
  std::map<std::string, NodeState> nodes;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::vector<ProvenanceRecord> log;
  RunResult totals;  // outputs, firings and faults; the log lives above
  std::uint64_t next_seq = 0;
  std::uint64_t next_msg = 0;
  std::int64_t instant = -1;
  std::size_t instant_deliveries = 0;

  explicit State(std::uint64_t seed) : rng(seed) {}

  std::string new_id() { return std::to_string(options.seed) + ":" + std::to_string(++next_msg); }

  void push(Event e) {
    e.seq = next_seq++;
    queue.push(std::move(e));
  }

  void fault(const std::string& msg, const std::string& node, const std::string& port, std::int64_t t,
             const Fault& f) {
    log.push_back({ProvenanceRecord::Kind::fault, msg, node, port, t,
                   Value{{"error", f.code}, {"message", f.message}}, {}});
    ++totals.faults;
  }

  // Checks the value against the resolved port schema, then logs one emit
  // per outgoing wire (or one unrouted emit) and schedules the deliveries.
  void emit(const std::string& node, const std::string& port, const Value& payload,
            const std::vector<std::string>& parents, std::int64_t t, const std::string& cause) {
    if (const Schema* s = typing.find(node, port, Direction::out)) {
      auto v = validate_value(payload, *s);
      if (!v.ok()) {
        fault(cause, node, port, t,
              {"schema-violation", "value " + payload.dump() + " does not conform to " + describe(*s)});
        return;
      }
    }
    std::vector<Wire> wires;
    for (const auto& w : flow.wires_from(node)) {
      if (w.from.port == port) wires.push_back(w);
    }
    if (wires.empty()) {
      log.push_back({ProvenanceRecord::Kind::emit, new_id(), node, port, t, payload, parents});
      return;
    }
    for (const auto& w : wires) {
      Event e;
      e.t = t;
      e.msg = new_id();
      e.wire = w;
      e.payload = payload;
      log.push_back({ProvenanceRecord::Kind::emit, e.msg, node, port, t, payload, parents});
      push(std::move(e));
    }
  }

  void tick(const Event& e) {
    auto& st = nodes.at(e.node);
    const auto& port = st.spec->outputs.front().name;
    const Schema* schema = typing.find(e.node, port, Direction::out);
    Value payload = generate_value(*schema, st.profile, rng);
    if (payload.is_object() && payload.contains("ts")) payload["ts"] = e.t;
    emit(e.node, port, payload, {}, e.t, "");
    if (e.t + st.period <= options.duration_ms) {
      Event next;
      next.t = e.t + st.period;
      next.tick = true;
      next.node = e.node;
      push(std::move(next));
    }
  }

  void deliver(const Event& e) {
    const auto& node = e.wire.to.node;
    const auto& port = e.wire.to.port;
    if (e.t != instant) {
      instant = e.t;
      instant_deliveries = 0;
    }
    if (++instant_deliveries > options.instant_limit) {
      fault(e.msg, node, port, e.t,
            {"loop-limit", "more than " + std::to_string(options.instant_limit) + " deliveries at t=" +
                               std::to_string(e.t) + "; message dropped"});
      return;
    }
    log.push_back({ProvenanceRecord::Kind::consume, e.msg, node, port, e.t, e.payload, {}});
    auto& st = nodes.at(node);
    const auto& behavior = st.spec->behavior;
    const std::string out = st.spec->outputs.empty() ? "" : st.spec->outputs.front().name;
    const std::vector<std::string> parents = {e.msg};
    try {
      if (behavior == "sink") {
        totals.outputs[node].push_back(e.payload);
      } else if (behavior == "function") {
        emit(node, out, evaluate(*st.program, e.payload, rng), parents, e.t, e.msg);
      } else if (behavior == "extract") {
        if (!e.payload.is_object()) throw Fault{"not-an-object", "extract needs an object, got " + e.payload.dump()};
        Value projected = Value::object();
        for (const auto& f : st.node->config.at("fields")) {
          auto it = e.payload.find(f.get<std::string>());
          if (it != e.payload.end()) projected[f.get<std::string>()] = *it;
        }
        emit(node, out, projected, parents, e.t, e.msg);
      } else if (behavior == "trigger") {
        const auto& cfg = st.node->config;
        const auto field = cfg.at("field").get<std::string>();
        auto it = e.payload.is_object() ? e.payload.find(field) : e.payload.end();
        if (!e.payload.is_object() || it == e.payload.end() || !it->is_number()) {
          throw Fault{"missing-field", "no numeric field \"" + field + "\" in " + e.payload.dump()};
        }
        const bool on = compare(it->get<double>(), cfg.at("op").get<std::string>(), cfg.at("threshold").get<double>());
        if (on != st.trigger_on) {
          st.trigger_on = on;
          if (on) ++totals.firings[node];
          emit(node, out, on, parents, e.t, e.msg);
        }
      } else if (behavior == "combine") {
        st.latest[port] = {e.msg, e.payload};
        if (st.latest.size() == st.spec->inputs.size()) {
          Value merged = Value::object();
          std::vector<std::string> sources;
          for (const auto& [p, latest] : st.latest) {
            merged[p] = latest.second;
            sources.push_back(latest.first);
          }
          emit(node, out, merged, sources, e.t, e.msg);
        }
      } else if (behavior == "chart") {
        const auto& cfg = st.node->config;
        Value point{{"t", e.t},
                    {"title", cfg.value("title", "")},
                    {"values", chart_values(cfg.at("input").get<std::string>(), e.payload)}};
        emit(node, out, point, parents, e.t, e.msg);
      } else if (behavior == "aggregate") {
        emit(node, out, Value{{"count", ++st.count}}, parents, e.t, e.msg);
      } else {
        emit(node, out, e.payload, parents, e.t, e.msg);
      }
    } catch (const Fault& f) {
      fault(e.msg, node, port, e.t, f);
    } catch (const EvalError& err) {
      fault(e.msg, node, port, e.t, {err.code(), err.what()});
    } catch (const TypeFault& err) {
      fault(e.msg, node, port, e.t, {"type-fault", err.what()});
    } catch (const Value::exception& err) {
      fault(e.msg, node, port, e.t, {"bad-payload", err.what()});
    }
  }
};

Session::Session(FlowGraph flow, const SpecRegistry& registry, RunOptions options)
    : state_(std::make_unique<State>(options.seed)) {
  auto& s = *state_;
  s.flow = std::move(flow);
  s.registry = &registry;
  s.options = std::move(options);

  const auto diagnostics = check_flow(s.flow, registry);
  std::size_t errors = 0;
  for (const auto& d : diagnostics) errors += d.severity == Severity::error;
  if (errors > 0) {
    throw Error(Errc::refuse_to_run, "flow:" + s.flow.id,
                "flow has " + std::to_string(errors) + " check error(s); run `privflow check` for details");
  }
  s.typing = type_flow(s.flow, registry);

  for (const auto& [id, n] : s.flow.nodes) {
    NodeState st;
    st.node = &n;
    st.spec = &registry.at(n.spec);
    if (st.spec->role == Role::output) s.totals.outputs[id];
    if (st.spec->behavior == "trigger") s.totals.firings[id] = 0;
    if (st.spec->behavior == "function") {
      auto sig = function_signature(s.flow, registry, id);
      st.program = check_program(n.config.at("body").get<std::string>(), *sig.input, sig.output);
    }
    if (st.spec->role == Role::datasource) st.period = n.config.value("period_ms", std::int64_t{0});
    s.nodes.emplace(id, std::move(st));
  }
  for (const auto& [id, name] : s.options.profiles) {
    auto it = s.nodes.find(id);
    if (it == s.nodes.end()) throw Error(Errc::unknown_node, node_loc(id), "no node " + id + " for profile " + name);
    if (it->second.spec->role != Role::datasource) {
      throw Error(Errc::unknown_profile, node_loc(id), "node " + id + " is not a datasource");
    }
    it->second.profile = it->second.spec->profile(name);
    if (!it->second.profile) {
      throw Error(Errc::unknown_profile, node_loc(id), it->second.spec->id + " has no profile \"" + name + "\"");
    }
  }
  for (const auto& [id, st] : s.nodes) {
    if (st.spec->role != Role::datasource || st.period <= 0 || st.period > s.options.duration_ms) continue;
    Event e;
    e.t = st.period;
    e.tick = true;
    e.node = id;
    s.push(std::move(e));
  }
}

Session::~Session() = default;
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;

bool Session::done() const { return state_->queue.empty(); }

std::size_t Session::step() {
  auto& s = *state_;
  if (s.queue.empty()) return 0;
  const auto before = s.log.size();
  Event e = s.queue.top();
  s.queue.pop();
  if (e.tick) s.tick(e);
  else s.deliver(e);
  return s.log.size() - before;
}

void Session::run() {
  while (!done()) step();
}

const std::vector<ProvenanceRecord>& Session::log() const { return state_->log; }

RunResult Session::result() const {
  RunResult r = state_->totals;
  r.log = state_->log;
  return r;
}

RunResult start_session(const FlowGraph& flow, const SpecRegistry& registry, const RunOptions& options) {
  Session s(flow, registry, options);
  s.run();
  return s.result();
}

RunResult replay(const FlowGraph& flow, const SpecRegistry& registry, const RunOptions& options) {
  return start_session(flow, registry, options);
}

// ---------------------------------------------------------------------------
// Inspection

LineageNode lineage(const std::vector<ProvenanceRecord>& log, const std::string& msg) {
  std::map<std::string, std::size_t> emits;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].kind == ProvenanceRecord::Kind::emit) emits.emplace(log[i].msg, i);
  }
  std::function<LineageNode(const std::string&, std::size_t)> build = [&](const std::string& id,
                                                                          std::size_t bound) {
    auto it = emits.find(id);
    if (it == emits.end()) throw Error(Errc::unknown_message, id, "no emit record for message " + id);
    // Parents must be emitted earlier; this also rules out cycles in a
    // hand-edited log.
    if (it->second >= bound) throw Error(Errc::parse_error, id, "message " + id + " precedes its parent");
    LineageNode n{log[it->second], {}};
    for (const auto& p : n.record.parents) n.parents.push_back(build(p, it->second));
    return n;
  };
  return build(msg, log.size());
}

OrderedValue lineage_to_json(const LineageNode& n) {
  OrderedValue doc = OrderedValue::object();
  doc["msg"] = n.record.msg;
  doc["node"] = n.record.node;
  doc["port"] = n.record.port;
  doc["t"] = n.record.t;
  doc["parents"] = OrderedValue::array();
  for (const auto& p : n.parents) doc["parents"].push_back(lineage_to_json(p));
  return doc;
}

std::vector<ProvenanceRecord> window(const std::vector<ProvenanceRecord>& log, const std::string& node,
                                     std::int64_t from, std::int64_t to) {
  if (from > to) {
    throw Error(Errc::parse_error, "window",
                "window start " + std::to_string(from) + " is after its end " + std::to_string(to));
  }
  bool known = false;
  std::vector<ProvenanceRecord> out;
  for (const auto& r : log) {
    if (r.node != node) continue;
    known = true;
    if (r.t >= from && r.t <= to) out.push_back(r);
  }
  if (!known) throw Error(Errc::unknown_node, node_loc(node), "no records for node " + node);
  return out;
}

}  // namespace privflow
