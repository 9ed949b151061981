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

#include "cli.hpp"

#include <atomic>
#include <charconv>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "privflow/devserver.hpp"
#include "privflow/error.hpp"
#include "privflow/library.hpp"
#include "privflow/manifest.hpp"
#include "privflow/report.hpp"
#include "privflow/runtime.hpp"

namespace privflow::cli {

namespace {

// A failure that maps straight onto an exit code.
struct Exit {
  int code;
  std::string message;
};

std::string read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Exit{kUsage, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << bytes)) throw Exit{kUsage, "cannot write " + path};
}

SpecRegistry registry_with(const std::string& specs_dir) {
  SpecRegistry r = builtin_specs();
  if (!specs_dir.empty()) load_spec_dir(r, specs_dir);
  return r;
}

FlowGraph read_flow(const std::string& path, const SpecRegistry& registry) {
  return load_flow(read_input(path), registry);
}

std::pair<std::int64_t, std::int64_t> parse_window(const std::string& text) {
  const auto dots = text.find("..");
  auto number = [&](std::string_view s, std::int64_t fallback) {
    if (s.empty()) return fallback;
    std::int64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) throw Exit{kUsage, "bad --window \"" + text + "\""};
    return v;
  };
  if (dots == std::string::npos) throw Exit{kUsage, "--window takes FROM..TO"};
  const std::string_view view(text);
  return {number(view.substr(0, dots), 0),
          number(view.substr(dots + 2), std::numeric_limits<std::int64_t>::max())};
}

// ---------------------------------------------------------------------------
// Subcommands

struct CheckArgs {
  std::string flow;
  std::string format = "text";
  std::string fail_on = "error";
  std::string specs;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const auto registry = registry_with(a.specs);
  const auto report = check_report(read_flow(a.flow, registry), registry);
  if (a.format == "json") out << report_to_json(report).dump(2) << "\n";
  else out << report_to_text(report);
  const Severity threshold = a.fail_on == "warn" ? Severity::warning : Severity::error;
  for (const auto& d : report.diagnostics) {
    if (d.severity >= threshold) return kDiagnostics;
  }
  return kSuccess;
}

struct ManifestArgs {
  std::string flow;
  std::string meta;
  std::string output;
  std::string specs;
};

int cmd_manifest(const ManifestArgs& a, std::ostream& out, std::ostream& err) {
  const auto registry = registry_with(a.specs);
  const auto flow = read_flow(a.flow, registry);
  Value meta_doc = Value::parse(read_input(a.meta), nullptr, false);
  if (meta_doc.is_discarded()) throw Exit{kUsage, a.meta + ": invalid JSON"};
  const auto meta = meta_from_json(meta_doc);
  if (auto missing = missing_statutory_fields(meta.statutory); !missing.empty()) {
    err << "missing-statutory-field:";
    for (const auto& f : missing) err << " " << f;
    err << "\n";
    return kDiagnostics;
  }
  const auto labels = propagate_labels(flow, registry);
  const auto risk = assess_risk(flow, registry, labels, check_flow(flow, registry));
  const auto bytes = serialize_manifest(build_manifest(flow, registry, labels, risk, meta));
  if (a.output.empty()) out << bytes;
  else write_output(a.output, bytes);
  return kSuccess;
}

struct RunArgs {
  std::string flow;
  std::uint64_t seed = 0;
  std::int64_t duration = 10000;
  std::vector<std::string> profiles;
  std::string provenance;
  std::string format = "text";
  std::string specs;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const auto registry = registry_with(a.specs);
  const auto flow = read_flow(a.flow, registry);
  RunOptions options;
  options.seed = a.seed;
  options.duration_ms = a.duration;
  for (const auto& p : a.profiles) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw Exit{kUsage, "--profile takes NODE=NAME, got \"" + p + "\""};
    options.profiles[p.substr(0, eq)] = p.substr(eq + 1);
  }
  RunResult result;
  try {
    result = start_session(flow, registry, options);
  } catch (const Error& e) {
    if (e.code() != Errc::refuse_to_run) throw;
    err << e.what() << "\n";
    return kDiagnostics;
  }
  if (!a.provenance.empty()) write_output(a.provenance, log_to_jsonl(result.log));
  const auto summary = run_summary_to_json(result);
  if (a.format == "json") {
    out << summary.dump(2) << "\n";
    return kSuccess;
  }
  out << "records " << summary["records"] << " (emitted " << summary["emitted"] << ", consumed "
      << summary["consumed"] << ", faults " << summary["faults"] << ")\n";
  for (const auto& [node, n] : summary["outputs"].items()) out << "output " << node << ": " << n << " message(s)\n";
  for (const auto& [node, n] : summary["firings"].items()) out << "trigger " << node << ": " << n << " firing(s)\n";
  return kSuccess;
}

struct InspectArgs {
  std::string log;
  std::string node;
  std::string message;
  std::string window;
  std::string format = "text";
};

void print_tree(const LineageNode& n, int depth, std::ostream& out) {
  out << std::string(2 * depth, ' ') << n.record.msg << " " << n.record.node << "." << n.record.port
      << " t=" << n.record.t << "\n";
  for (const auto& p : n.parents) print_tree(p, depth + 1, out);
}

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  const auto log = parse_jsonl(read_input(a.log));
  if (!a.message.empty()) {
    if (!a.window.empty()) throw Exit{kUsage, "--window applies to --node only"};
    const auto tree = lineage(log, a.message);
    if (a.format == "json") out << lineage_to_json(tree).dump(2) << "\n";
    else print_tree(tree, 0, out);
    return kSuccess;
  }
  auto [from, to] = a.window.empty() ? std::pair<std::int64_t, std::int64_t>{0, std::numeric_limits<std::int64_t>::max()}
                                     : parse_window(a.window);
  const auto records = window(log, a.node, from, to);
  if (a.format == "json") {
    OrderedValue doc = OrderedValue::array();
    for (const auto& r : records) doc.push_back(record_to_json(r));
    out << doc.dump(2) << "\n";
    return kSuccess;
  }
  for (const auto& r : records) {
    out << "t=" << r.t << " " << to_string(r.kind) << " " << r.node << "." << r.port << " " << r.msg << " "
        << r.payload.dump() << "\n";
  }
  return kSuccess;
}

struct ServeArgs {
  int port = -1;
  std::string host = "127.0.0.1";
  std::string specs;
};

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  int port = a.port;
  if (port < 0) {
    const char* env = std::getenv("PORT");
    port = env ? std::atoi(env) : 8080;
  }
  DevServer server(registry_with(a.specs));
  if (!server.bind(a.host, port)) {
    err << "cannot bind " << a.host << ":" << port << "\n";
    return kInternal;
  }
  g_interrupted = false;
  auto previous_int = std::signal(SIGINT, on_signal);
  auto previous_term = std::signal(SIGTERM, on_signal);
  std::atomic<bool> serving{true};
  std::thread watcher([&] {
    while (serving && !g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    server.stop();
  });
  out << "listening on http://" << a.host << ":" << server.port() << std::endl;
  const bool ok = server.listen();
  serving = false;
  watcher.join();
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);
  if (!ok && !g_interrupted) {
    err << "server stopped unexpectedly\n";
    return kInternal;
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"privflow: build, check and test privacy-aware IoT flows", "privflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "privflow 0.1.0");

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Type-check a flow and report labels and risk");
  c->add_option("flow", check.flow, "Flow file")->required();
  c->add_option("--format", check.format)->check(CLI::IsMember({"text", "json"}));
  c->add_option("--fail-on", check.fail_on, "Exit 1 on diagnostics at or above this level")
      ->check(CLI::IsMember({"warn", "error"}));
  c->add_option("--specs", check.specs, "Directory of extra node specs");

  ManifestArgs manifest;
  auto* m = app.add_subcommand("manifest", "Write the app manifest");
  m->add_option("flow", manifest.flow, "Flow file")->required();
  m->add_option("--meta", manifest.meta, "Developer metadata (JSON)")->required();
  m->add_option("-o,--output", manifest.output, "Output file (default: standard output)");
  m->add_option("--specs", manifest.specs, "Directory of extra node specs");

  RunArgs run_args;
  auto* r = app.add_subcommand("run", "Run a flow on mock data");
  r->add_option("flow", run_args.flow, "Flow file")->required();
  r->add_option("--seed", run_args.seed);
  r->add_option("--duration", run_args.duration, "Virtual milliseconds")->check(CLI::NonNegativeNumber);
  r->add_option("--profile", run_args.profiles, "NODE=PROFILE, repeatable");
  r->add_option("--provenance", run_args.provenance, "Write the provenance log (JSON Lines) here");
  r->add_option("--format", run_args.format)->check(CLI::IsMember({"text", "json"}));
  r->add_option("--specs", run_args.specs, "Directory of extra node specs");

  InspectArgs inspect;
  auto* i = app.add_subcommand("inspect", "Query a provenance log");
  i->add_option("log", inspect.log, "Provenance log (JSON Lines)")->required();
  auto* node_opt = i->add_option("--node", inspect.node, "List a node's records");
  auto* msg_opt = i->add_option("--message", inspect.message, "Show a message's lineage");
  node_opt->excludes(msg_opt);
  i->add_option("--window", inspect.window, "FROM..TO in virtual ms (with --node)");
  i->add_option("--format", inspect.format)->check(CLI::IsMember({"text", "json"}));

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Start the development server");
  s->add_option("--port", serve.port, "Port (default: $PORT, else 8080)");
  s->add_option("--host", serve.host);
  s->add_option("--specs", serve.specs, "Directory of extra node specs");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*c) return cmd_check(check, out);
    if (*m) return cmd_manifest(manifest, out, err);
    if (*r) return cmd_run(run_args, out, err);
    if (*i) {
      if (inspect.node.empty() && inspect.message.empty()) throw Exit{kUsage, "inspect needs --node or --message"};
      return cmd_inspect(inspect, out);
    }
    if (*s) return cmd_serve(serve, out, err);
    return kUsage;
  } catch (const Exit& e) {
    err << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace privflow::cli
