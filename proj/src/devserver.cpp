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

#include "privflow/devserver.hpp"

#include <charconv>
#include <chrono>
#include <condition_variable>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "privflow/error.hpp"
#include "privflow/library.hpp"
#include "privflow/report.hpp"
#include "privflow/runtime.hpp"

namespace privflow {

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& location,
                const std::string& message) {
  OrderedValue body = OrderedValue::object();
  body["error"] = std::string(code);
  body["location"] = location;
  body["message"] = message;
  send_json(res, status, body.dump() + "\n");
}

void send_error(httplib::Response& res, int status, const Error& e) {
  send_error(res, status, to_string(e.code()), e.location(), e.message());
}

// Structural problems with a submitted flow are the client's to fix.
int flow_error_status(Errc code) {
  switch (code) {
    case Errc::refuse_to_run: return 409;
    case Errc::unknown_message: return 404;
    default: return 422;
  }
}

std::optional<std::int64_t> to_int(const std::string& text) {
  std::int64_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return v;
}

struct LiveSession {
  std::string id;
  std::mutex mu;
  std::condition_variable cv;
  std::optional<Session> session;
  bool stop_requested = false;
  bool finished = false;
  std::chrono::milliseconds delay{0};
  std::thread runner;

  void run() {
    std::unique_lock lock(mu);
    while (!stop_requested && !session->done()) {
      session->step();
      cv.notify_all();
      if (delay.count() > 0) cv.wait_for(lock, delay, [&] { return stop_requested; });
    }
    finished = true;
    cv.notify_all();
  }

  void stop() {
    std::unique_lock lock(mu);
    stop_requested = true;
    cv.notify_all();
    cv.wait(lock, [&] { return finished; });
  }
};

}  // namespace

struct DevServer::Impl {
  SpecRegistry registry;
  httplib::Server server;
  int port = -1;
  std::mutex sessions_mu;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions;
  std::uint64_t next_session = 0;

  explicit Impl(SpecRegistry r) : registry(std::move(r)) {
    // httplib defaults to SO_REUSEPORT, which lets a second server share a
    // busy port silently. Plain SO_REUSEADDR makes a taken port fail to bind.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    routes();
  }

  ~Impl() {
    halt_sessions();
    for (auto& [id, s] : sessions) {
      if (s->runner.joinable()) s->runner.join();
    }
  }

  void halt_sessions() {
    std::vector<std::shared_ptr<LiveSession>> live;
    {
      std::lock_guard lock(sessions_mu);
      for (auto& [id, s] : sessions) live.push_back(s);
    }
    for (auto& s : live) s->stop();
  }

  std::shared_ptr<LiveSession> find(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    std::lock_guard lock(sessions_mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) {
      send_error(res, 404, "unknown-session", "session:" + id, "no session " + id);
      return nullptr;
    }
    return it->second;
  }

  void routes() {
    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, "{\"status\":\"ok\"}\n");
    });

    server.Get("/api/nodespecs", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, registry_to_json(registry).dump(2) + "\n");
    });

    server.Post("/api/flows/validate", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        auto flow = load_flow(req.body, registry);
        send_json(res, 200, report_to_json(check_report(flow, registry)).dump(2) + "\n");
      } catch (const Error& e) {
        send_error(res, 422, e);
      }
    });

    server.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      create_session(req, res);
    });

    server.Get(R"(/api/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto s = find(req, res);
      if (!s) return;
      std::lock_guard lock(s->mu);
      OrderedValue body = OrderedValue::object();
      body["id"] = s->id;
      body["done"] = s->finished;
      body["stopped"] = s->stop_requested;
      body["summary"] = run_summary_to_json(s->session->result());
      send_json(res, 200, body.dump(2) + "\n");
    });

    server.Get(R"(/api/sessions/([^/]+)/stream)", [this](const httplib::Request& req, httplib::Response& res) {
      auto s = find(req, res);
      if (!s) return;
      auto next = std::make_shared<std::size_t>(0);
      res.set_chunked_content_provider("application/x-ndjson", [s, next](std::size_t, httplib::DataSink& sink) {
        std::vector<std::string> frames;
        bool complete = false;
        {
          std::unique_lock lock(s->mu);
          s->cv.wait_for(lock, std::chrono::milliseconds(200),
                         [&] { return s->session->log().size() > *next || s->finished; });
          const auto& log = s->session->log();
          for (; *next < log.size(); ++*next) frames.push_back(record_to_json(log[*next]).dump() + "\n");
          complete = s->finished && *next == log.size();
        }
        for (const auto& f : frames) {
          if (!sink.write(f.data(), f.size())) return false;
        }
        if (complete) sink.done();
        return true;
      });
    });

    server.Get(R"(/api/sessions/([^/]+)/provenance)", [this](const httplib::Request& req, httplib::Response& res) {
      auto s = find(req, res);
      if (!s) return;
      if (!req.has_param("node")) {
        send_error(res, 400, "parse-error", "query", "the node parameter is required");
        return;
      }
      std::int64_t from = 0;
      std::int64_t to = std::numeric_limits<std::int64_t>::max();
      for (auto [key, slot] : {std::pair{"from", &from}, std::pair{"to", &to}}) {
        if (!req.has_param(key)) continue;
        auto v = to_int(req.get_param_value(key));
        if (!v) {
          send_error(res, 400, "parse-error", std::string("query.") + key, "expected an integer");
          return;
        }
        *slot = *v;
      }
      std::vector<ProvenanceRecord> log;
      {
        std::lock_guard lock(s->mu);
        log = s->session->log();
      }
      try {
        OrderedValue body = OrderedValue::array();
        for (const auto& r : window(log, req.get_param_value("node"), from, to)) body.push_back(record_to_json(r));
        send_json(res, 200, body.dump(2) + "\n");
      } catch (const Error& e) {
        send_error(res, e.code() == Errc::unknown_node ? 404 : 400, e);
      }
    });

    server.Get(R"(/api/sessions/([^/]+)/lineage)", [this](const httplib::Request& req, httplib::Response& res) {
      auto s = find(req, res);
      if (!s) return;
      if (!req.has_param("msg")) {
        send_error(res, 400, "parse-error", "query", "the msg parameter is required");
        return;
      }
      std::vector<ProvenanceRecord> log;
      {
        std::lock_guard lock(s->mu);
        log = s->session->log();
      }
      try {
        send_json(res, 200, lineage_to_json(lineage(log, req.get_param_value("msg"))).dump(2) + "\n");
      } catch (const Error& e) {
        send_error(res, flow_error_status(e.code()), e);
      }
    });

    server.Post(R"(/api/sessions/([^/]+)/stop)", [this](const httplib::Request& req, httplib::Response& res) {
      auto s = find(req, res);
      if (!s) return;
      s->stop();
      std::lock_guard lock(s->mu);
      OrderedValue body = OrderedValue::object();
      body["id"] = s->id;
      body["stopped"] = true;
      body["records"] = s->session->log().size();
      send_json(res, 200, body.dump(2) + "\n");
    });

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 404) send_error(res, 404, "not-found", req.path, "no route for " + req.method + " " + req.path);
    });
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    Value doc = Value::parse(req.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      send_error(res, 400, "parse-error", "body", "expected a JSON object");
      return;
    }
    static const std::set<std::string> kKeys = {"flow", "seed", "duration", "profiles", "step_delay_ms"};
    for (const auto& [k, v] : doc.items()) {
      if (!kKeys.count(k)) {
        send_error(res, 400, "unknown-key", k, "unknown request key \"" + k + "\"");
        return;
      }
    }
    RunOptions options;
    std::chrono::milliseconds delay{0};
    try {
      if (!doc.contains("flow")) throw Error(Errc::parse_error, "flow", "the flow field is required");
      options.seed = doc.value("seed", std::uint64_t{0});
      options.duration_ms = doc.value("duration", std::int64_t{0});
      if (options.duration_ms < 0) throw Error(Errc::parse_error, "duration", "duration must be non-negative");
      options.profiles = doc.value("profiles", std::map<std::string, std::string>{});
      delay = std::chrono::milliseconds(doc.value("step_delay_ms", std::int64_t{0}));
    } catch (const Value::exception& e) {
      send_error(res, 400, "parse-error", "body", e.what());
      return;
    } catch (const Error& e) {
      send_error(res, 400, e);
      return;
    }
    auto live = std::make_shared<LiveSession>();
    live->delay = delay;
    try {
      live->session.emplace(flow_from_json(doc["flow"], registry), registry, options);
    } catch (const Error& e) {
      send_error(res, flow_error_status(e.code()), e);
      return;
    }
    {
      std::lock_guard lock(sessions_mu);
      live->id = "s" + std::to_string(++next_session);
      sessions[live->id] = live;
    }
    live->runner = std::thread([live] { live->run(); });
    send_json(res, 201, "{\"id\":\"" + live->id + "\"}\n");
  }
};

DevServer::DevServer(SpecRegistry registry) : impl_(std::make_unique<Impl>(std::move(registry))) {}

DevServer::~DevServer() = default;

bool DevServer::bind(const std::string& host, int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
    return impl_->port > 0;
  }
  if (!impl_->server.bind_to_port(host, port)) return false;
  impl_->port = port;
  return true;
}

int DevServer::port() const { return impl_->port; }

bool DevServer::listen() { return impl_->server.listen_after_bind(); }

void DevServer::stop() {
  impl_->halt_sessions();
  impl_->server.stop();
}

}  // namespace privflow
