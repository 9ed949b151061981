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

// Type-directed random programs over a given input schema. Most of what
// this produces type-checks; callers filter with infer_type. Literals
// include values near the Int and Num limits so overflow paths get hit.

#include <string>
#include <utility>
#include <vector>

#include "privflow/expr.hpp"
#include "privflow/library.hpp"

namespace privflow::testing {

class ProgramGen {
 public:
  enum class K { B, I, N, S, A, O };

  ProgramGen(const Schema& input, Rng& rng) : rng_(rng) { collect(input, "msg", 0); }

  std::string program() { return gen(random_kind(), 0); }

 private:
  struct Path {
    std::string text;
    K kind;
  };

  K random_kind() {
    static const K kinds[] = {K::B, K::I, K::N, K::S, K::A, K::O, K::I, K::N, K::B};
    return kinds[rng_.index(std::size(kinds))];
  }

  static std::optional<K> kind_of(const Schema& s) {
    switch (s.kind) {
      case Kind::boolean: return K::B;
      case Kind::integer: return K::I;
      case Kind::number: return K::N;
      case Kind::string: return K::S;
      case Kind::array: return K::A;
      case Kind::object: return K::O;
      default: return std::nullopt;
    }
  }

  static std::string field(const std::string& base, const std::string& name) { return base + "." + name; }

  void collect(const Schema& s, const std::string& text, int depth) {
    if (auto k = kind_of(s)) paths_.push_back({text, *k});
    if (s.kind != Kind::object || depth >= 2) return;
    for (const auto& p : s.properties) {
      const auto t = field(text, p.name);
      if (s.is_required(p.name)) {
        collect(p.schema, t, depth + 1);
        continue;
      }
      switch (p.schema.kind) {
        case Kind::integer: paths_.push_back({"coalesce(" + t + ", 0)", K::I}); break;
        case Kind::number: paths_.push_back({"coalesce(" + t + ", 0.5)", K::N}); break;
        case Kind::boolean: paths_.push_back({"coalesce(" + t + ", false)", K::B}); break;
        case Kind::string: paths_.push_back({"coalesce(" + t + ", \"z\")", K::S}); break;
        default: break;
      }
    }
  }

  std::vector<std::string> sources(K want) const {
    std::vector<std::string> out;
    for (const auto& p : paths_) {
      if (p.kind == want || (want == K::N && p.kind == K::I)) out.push_back(p.text);
    }
    for (const auto& [name, k] : env_) {
      if (k == want || (want == K::N && k == K::I)) out.push_back(name);
    }
    return out;
  }

  std::string literal(K want) {
    switch (want) {
      case K::B: return rng_.coin() ? "true" : "false";
      case K::I: {
        static const char* kInts[] = {"0", "1", "2", "-3", "7", "100", "9223372036854775807",
                                      "4611686018427387904", "-9223372036854775807"};
        return kInts[rng_.index(std::size(kInts))];
      }
      case K::N: {
        static const char* kNums[] = {"0.5", "-2.25", "1e300", "3.0", "0.0", "-1e-3"};
        return kNums[rng_.index(std::size(kNums))];
      }
      case K::S: {
        static const char* kStrs[] = {"\"a\"", "\"\"", "\"xy\"", "\"b\""};
        return kStrs[rng_.index(std::size(kStrs))];
      }
      case K::A: return rng_.coin() ? "[]" : "[" + literal(K::I) + ", " + literal(K::I) + "]";
      case K::O: return "{k: " + literal(K::I) + "}";
    }
    return "true";
  }

  std::string leaf(K want) {
    auto src = sources(want);
    if (!src.empty() && rng_.uniform_int(0, 2) != 0) return src[rng_.index(src.size())];
    return literal(want);
  }

  std::string paren(const std::string& s) { return "(" + s + ")"; }

  std::string gen(K want, int depth) {
    if (depth >= 4 || rng_.uniform_int(0, 3) == 0) return leaf(want);
    const int d = depth + 1;
    const auto choice = rng_.uniform_int(0, 9);
    if (choice == 0) {
      const auto name = "v" + std::to_string(next_var_++);
      const K k = random_kind();
      const auto bound = gen(k, d);
      env_.emplace_back(name, k);
      const auto body = gen(want, d);
      env_.pop_back();
      return paren("let " + name + " = " + bound + " in " + body);
    }
    if (choice == 1) {
      return paren("if " + gen(K::B, d) + " then " + gen(want, d) + " else " + gen(want, d));
    }
    switch (want) {
      case K::B: {
        static const char* kCmp[] = {"<", "<=", ">", ">=", "==", "!="};
        switch (rng_.uniform_int(0, 5)) {
          case 0: return paren(gen(K::N, d) + " " + kCmp[rng_.index(6)] + " " + gen(K::N, d));
          case 1: return paren(gen(K::S, d) + " " + kCmp[rng_.index(6)] + " " + gen(K::S, d));
          case 2: return paren(gen(K::B, d) + (rng_.coin() ? " && " : " || ") + gen(K::B, d));
          case 3: return "!" + paren(gen(K::B, d));
          case 4: return "contains(" + gen(K::A, d) + ", " + gen(K::I, d) + ")";
          default: return "contains(" + gen(K::S, d) + ", " + gen(K::S, d) + ")";
        }
      }
      case K::I: {
        static const char* kOps[] = {"+", "-", "*", "/", "%"};
        switch (rng_.uniform_int(0, 6)) {
          case 0:
          case 1: return paren(gen(K::I, d) + " " + kOps[rng_.index(5)] + " " + gen(K::I, d));
          case 2: return "abs(" + gen(K::I, d) + ")";
          case 3: return std::string(rng_.coin() ? "min(" : "max(") + gen(K::I, d) + ", " + gen(K::I, d) + ")";
          case 4: return "round(" + gen(K::N, d) + ")";
          case 5: return "len(" + gen(rng_.coin() ? K::A : K::S, d) + ")";
          default: return "-" + paren(gen(K::I, d));
        }
      }
      case K::N: {
        static const char* kOps[] = {"+", "-", "*", "/"};
        switch (rng_.uniform_int(0, 4)) {
          case 0:
          case 1: return paren(gen(K::N, d) + " " + kOps[rng_.index(4)] + " " + gen(K::N, d));
          case 2: return "abs(" + gen(K::N, d) + ")";
          case 3: return std::string(rng_.coin() ? "min(" : "max(") + gen(K::N, d) + ", " + gen(K::N, d) + ")";
          default: return "-" + paren(gen(K::N, d));
        }
      }
      case K::S: return paren(gen(K::S, d) + " + " + gen(K::S, d));
      case K::A: {
        const K item = rng_.coin() ? K::I : random_kind();
        std::string out = "[";
        const auto n = rng_.uniform_int(0, 3);
        for (int i = 0; i < n; ++i) out += (i ? ", " : "") + gen(item, d);
        return out + "]";
      }
      case K::O: {
        static const char* kKeys[] = {"a", "b", "out", "in"};
        std::string out = "{";
        const auto n = rng_.uniform_int(0, 3);
        for (int i = 0; i < n; ++i) out += std::string(i ? ", " : "") + kKeys[i] + ": " + gen(random_kind(), d);
        return out + "}";
      }
    }
    return leaf(want);
  }

  Rng& rng_;
  std::vector<Path> paths_;
  std::vector<std::pair<std::string, K>> env_;
  int next_var_ = 0;
};

/// Every port schema the built-in library can put on a wire, including each
/// select case.
inline std::vector<Schema> library_schemas() {
  std::vector<Schema> out;
  auto add = [&](const Schema& s) {
    for (const auto& x : out) {
      if (x == s) return;
    }
    out.push_back(s);
  };
  for (const auto& [id, spec] : builtin_specs()) {
    for (const auto* ports : {&spec.inputs, &spec.outputs}) {
      for (const auto& p : *ports) {
        if (p.rule.mode == PortRule::Mode::fixed) add(p.rule.schema);
        if (p.rule.mode == PortRule::Mode::select) {
          for (const auto& [key, s] : p.rule.cases) add(s);
        }
      }
    }
  }
  return out;
}

}  // namespace privflow::testing
