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

#include "privflow/error.hpp"

namespace privflow {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::schema_error: return "schema-error";
    case Errc::generation_error: return "generation-error";
    case Errc::parse_error: return "parse-error";
    case Errc::unknown_spec: return "unknown-spec";
    case Errc::dangling_wire: return "dangling-wire";
    case Errc::bad_config: return "bad-config";
    case Errc::duplicate_spec: return "duplicate-spec";
    case Errc::invalid_spec: return "invalid-spec";
    case Errc::duplicate_node: return "duplicate-node";
    case Errc::duplicate_wire: return "duplicate-wire";
    case Errc::unknown_key: return "unknown-key";
    case Errc::unknown_node: return "unknown-node";
    case Errc::unknown_port: return "unknown-port";
    case Errc::missing_entity: return "missing-entity";
    case Errc::syntax_error: return "syntax-error";
    case Errc::unknown_message: return "unknown-message";
    case Errc::missing_statutory_field: return "missing-statutory-field";
    case Errc::refuse_to_run: return "refuse-to-run";
    case Errc::unknown_profile: return "unknown-profile";
  }
  return "unknown";
}

Error::Error(Errc code, std::string location, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) +
                         (location.empty() ? "" : " at " + location) + ": " + message),
      code_(code),
      location_(std::move(location)),
      message_(message) {}

}  // namespace privflow
