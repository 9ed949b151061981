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

// HTTP facade over the analyses and the runtime, used by the flow editor.
//
//   GET  /api/health
//   GET  /api/nodespecs
//   POST /api/flows/validate                 flow JSON -> check report
//   POST /api/sessions                       {flow, seed, duration, profiles, step_delay_ms?}
//   GET  /api/sessions/{id}                  status and run summary
//   GET  /api/sessions/{id}/stream           chunked JSON Lines, one record per chunk
//   GET  /api/sessions/{id}/provenance       ?node=&from=&to= window query
//   GET  /api/sessions/{id}/lineage          ?msg= ancestor tree
//   POST /api/sessions/{id}/stop
//
// Errors come back as {"error": code, "location": loc, "message": text}.

#include <memory>
#include <string>

#include "privflow/flow.hpp"

namespace privflow {

class DevServer {
 public:
  explicit DevServer(SpecRegistry registry);
  ~DevServer();

  DevServer(const DevServer&) = delete;
  DevServer& operator=(const DevServer&) = delete;

  /// Binds without serving yet. Port 0 picks a free port. Returns false when
  /// the address cannot be bound (for example, the port is in use).
  bool bind(const std::string& host, int port);
  int port() const;

  /// Serves until stop(); returns false if the listener failed.
  bool listen();
  /// Safe from any thread. Halts live sessions and ends open streams.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace privflow
