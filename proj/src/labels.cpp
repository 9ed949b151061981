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

#include "privflow/labels.hpp"

#include <algorithm>

#include "privflow/error.hpp"

namespace privflow {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::parse_error, "", what); }

}  // namespace

bool ConfigPredicate::holds(const Value& config) const {
  if (key.empty()) return true;
  if (!config.is_object()) return false;
  auto it = config.find(key);
  if (it == config.end()) return false;
  return std::find(values.begin(), values.end(), *it) != values.end();
}

Value predicate_to_json(const ConfigPredicate& p) {
  return Value{{"key", p.key}, {"in", p.values}};
}

ConfigPredicate predicate_from_json(const Value& doc) {
  if (!doc.is_object() || !doc.contains("key") || !doc["key"].is_string()) {
    bad("config predicate needs a string \"key\"");
  }
  ConfigPredicate p;
  p.key = doc["key"].get<std::string>();
  if (auto it = doc.find("in"); it != doc.end()) {
    if (!it->is_array()) bad("config predicate \"in\" must be an array");
    p.values = it->get<std::vector<Value>>();
  }
  return p;
}

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::identifier: return "identifier";
    case Category::sensitive: return "sensitive";
    case Category::personal: return "personal";
  }
  return "?";
}

std::string_view to_string(Derivation d) noexcept {
  return d == Derivation::primary ? "primary" : "secondary";
}

Value condition_to_json(const Condition& c) {
  if (c.kind == Condition::Kind::granularity_at_most) {
    return Value{{"kind", "granularity-at-most"}, {"period_ms", c.period_ms}};
  }
  return Value{{"kind", "requires-atom"}, {"tag", c.tag}};
}

Condition condition_from_json(const Value& doc) {
  if (!doc.is_object()) bad("condition must be an object");
  const auto kind = doc.value("kind", "");
  if (kind == "granularity-at-most") {
    if (!doc.contains("period_ms") || !doc["period_ms"].is_number_integer()) {
      bad("granularity-at-most needs an integer period_ms");
    }
    return Condition::granularity_at_most(doc["period_ms"].get<std::int64_t>());
  }
  if (kind == "requires-atom") {
    if (!doc.contains("tag") || !doc["tag"].is_string()) bad("requires-atom needs a string tag");
    return Condition::requires_atom(doc["tag"].get<std::string>());
  }
  bad("unknown condition kind \"" + kind + "\"");
}

Value atom_to_json(const PersonalAtom& a) {
  Value conds = Value::array();
  for (const auto& c : a.conditions) conds.push_back(condition_to_json(c));
  return Value{{"cat", to_string(a.category)},
               {"tag", a.tag},
               {"derivation", to_string(a.derivation)},
               {"conditions", std::move(conds)}};
}

PersonalAtom atom_from_json(const Value& doc) {
  if (!doc.is_object()) bad("atom must be an object");
  PersonalAtom a;
  const auto cat = doc.value("cat", "");
  if (cat == "identifier") a.category = Category::identifier;
  else if (cat == "sensitive") a.category = Category::sensitive;
  else if (cat == "personal") a.category = Category::personal;
  else bad("unknown atom category \"" + cat + "\"");
  if (!doc.contains("tag") || !doc["tag"].is_string()) bad("atom needs a string tag");
  a.tag = doc["tag"].get<std::string>();
  const auto deriv = doc.value("derivation", "primary");
  if (deriv == "primary") a.derivation = Derivation::primary;
  else if (deriv == "secondary") a.derivation = Derivation::secondary;
  else bad("unknown derivation \"" + deriv + "\"");
  if (auto it = doc.find("conditions"); it != doc.end()) {
    for (const auto& c : *it) a.conditions.push_back(condition_from_json(c));
  }
  return a;
}

Value label_to_json(const PersonalLabel& label) {
  Value out = Value::array();
  for (const auto& a : label) out.push_back(atom_to_json(a));
  return out;
}

PersonalLabel label_from_json(const Value& doc) {
  if (!doc.is_array()) bad("label must be an array of atoms");
  PersonalLabel out;
  for (const auto& a : doc) out.insert(atom_from_json(a));
  return out;
}

Value transfer_to_json(const LabelTransfer& t) {
  Value out = Value::object();
  switch (t.kind) {
    case LabelTransfer::Kind::emit: out["transfer"] = "emit"; break;
    case LabelTransfer::Kind::passthrough_plus: out["transfer"] = "passthrough-plus"; break;
    case LabelTransfer::Kind::filter: out["transfer"] = "filter"; break;
    case LabelTransfer::Kind::clear: out["transfer"] = "clear"; break;
  }
  if (!t.atoms.empty()) {
    Value atoms = Value::array();
    for (const auto& d : t.atoms) {
      Value a = atom_to_json(d.atom);
      if (d.when) a["when"] = predicate_to_json(*d.when);
      atoms.push_back(std::move(a));
    }
    out["atoms"] = std::move(atoms);
  }
  if (!t.drop.empty()) out["drop"] = t.drop;
  if (!t.drop_config_key.empty()) out["drop_config_key"] = t.drop_config_key;
  return out;
}

LabelTransfer transfer_from_json(const Value& doc) {
  if (!doc.is_object()) bad("label transfer must be an object");
  LabelTransfer t;
  const auto kind = doc.value("transfer", "passthrough-plus");
  if (kind == "emit") t.kind = LabelTransfer::Kind::emit;
  else if (kind == "passthrough-plus") t.kind = LabelTransfer::Kind::passthrough_plus;
  else if (kind == "filter") t.kind = LabelTransfer::Kind::filter;
  else if (kind == "clear") t.kind = LabelTransfer::Kind::clear;
  else bad("unknown transfer \"" + kind + "\"");
  if (auto it = doc.find("atoms"); it != doc.end()) {
    for (const auto& a : *it) {
      AtomDecl d{atom_from_json(a), std::nullopt};
      if (a.contains("when")) d.when = predicate_from_json(a["when"]);
      t.atoms.push_back(std::move(d));
    }
  }
  if (auto it = doc.find("drop"); it != doc.end()) t.drop = it->get<std::vector<std::string>>();
  t.drop_config_key = doc.value("drop_config_key", "");
  return t;
}

std::string badges(const PersonalLabel& label) {
  bool i = false;
  bool s = false;
  bool p = false;
  for (const auto& a : label) {
    i |= a.category == Category::identifier;
    s |= a.category == Category::sensitive;
    p |= a.category == Category::personal;
  }
  return std::string(p ? "P" : "") + (s ? "S" : "") + (i ? "I" : "");
}

}  // namespace privflow
