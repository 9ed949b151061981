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

#include <stdexcept>
#include <string>
#include <string_view>

namespace privflow {

/// Stable error classes. The string form (see to_string) is what appears in
/// CLI output and HTTP error bodies, so never rename an existing entry.
enum class Errc {
  schema_error,
  generation_error,
  parse_error,
  unknown_spec,
  dangling_wire,
  bad_config,
  duplicate_spec,
  invalid_spec,
  duplicate_node,
  duplicate_wire,
  unknown_key,
  unknown_node,
  unknown_port,
  missing_entity,
  syntax_error,
  unknown_message,
  missing_statutory_field,
  refuse_to_run,
  unknown_profile,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string location, const std::string& message);

  Errc code() const noexcept { return code_; }
  const std::string& location() const noexcept { return location_; }
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string location_;
  std::string message_;
};

}  // namespace privflow
