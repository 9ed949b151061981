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

#include "privflow/manifest.hpp"

#include <set>
#include <sstream>

#include "privflow/error.hpp"

namespace privflow {

namespace {

std::string format_atoms(const PersonalLabel& label) {
  if (label.empty()) return "none";
  std::string out;
  for (const auto& a : label) {
    if (!out.empty()) out += ", ";
    out += std::string(to_string(a.category)) + ":" + a.tag;
  }
  return out;
}

std::string detail_text(const Manifest& m) {
  std::ostringstream os;
  os << m.app.name << " " << m.app.version << " by " << m.app.author << "\n";
  if (!m.description.empty()) os << m.description << "\n";
  if (!m.benefits.empty()) os << "Benefits: " << m.benefits << "\n";
  os << "\nData sources:\n";
  if (m.datasources.empty()) os << "- none\n";
  for (const auto& d : m.datasources) {
    os << "- " << d.node << " (" << d.spec << ")";
    if (d.period_ms) os << ", sampled every " << *d.period_ms << " ms";
    os << ": " << d.purpose << " Personal data: " << format_atoms(d.atoms) << ".\n";
  }
  os << "\nOutputs:\n";
  if (m.outputs.empty()) os << "- none\n";
  for (const auto& o : m.outputs) {
    os << "- " << o.node << " (" << o.spec << ") receives personal data: " << format_atoms(o.atoms) << ".\n";
  }
  os << "\nExports:\n";
  if (m.exports.empty()) os << "- none\n";
  for (const auto& e : m.exports) {
    os << "- " << e.node << " to " << e.destination << (e.off_box ? " (leaves the device)" : " (stays on the device)")
       << ", personal data: " << format_atoms(e.atoms) << ".\n";
  }
  os << "\nActuations:\n";
  if (m.actuations.empty()) os << "- none\n";
  for (const auto& a : m.actuations) os << "- " << a.node << " switches " << a.device << ".\n";
  os << "\nRisk: " << m.risk.band << " (" << m.risk.score << " of 5)\n";
  os << "\nController: " << m.statutory.controller << "\n";
  os << "Purpose of processing: " << m.statutory.purpose << "\n";
  os << "Retention: " << m.statutory.retention << "\n";
  os << "Your rights: " << m.statutory.rights << "\n";
  return os.str();
}

std::string config_string(const Value& config, const char* key) {
  auto it = config.find(key);
  if (it == config.end()) return "";
  return it->is_string() ? it->get<std::string>() : it->dump();
}

// Field access with the failing path in the error location.
const Value& field(const Value& doc, const std::string& key, const std::string& where) {
  if (!doc.is_object()) throw Error(Errc::parse_error, where, "expected an object");
  auto it = doc.find(key);
  if (it == doc.end()) throw Error(Errc::parse_error, where + "." + key, "missing field");
  return *it;
}

std::string str(const Value& doc, const std::string& key, const std::string& where) {
  const Value& v = field(doc, key, where);
  if (!v.is_string()) throw Error(Errc::parse_error, where + "." + key, "expected a string");
  return v.get<std::string>();
}

const Value& arr(const Value& doc, const std::string& key, const std::string& where) {
  const Value& v = field(doc, key, where);
  if (!v.is_array()) throw Error(Errc::parse_error, where + "." + key, "expected an array");
  return v;
}

PersonalLabel atoms(const Value& doc, const std::string& where) {
  try {
    return label_from_json(arr(doc, "atoms", where));
  } catch (const Error& e) {
    if (e.location().rfind(where, 0) == 0) throw;
    throw Error(Errc::parse_error, where + ".atoms", e.what());
  }
}

OrderedValue ordered_label(const PersonalLabel& label) { return to_ordered(label_to_json(label)); }

}  // namespace

ManifestMeta meta_from_json(const Value& doc) {
  ManifestMeta m;
  if (!doc.is_object()) throw Error(Errc::parse_error, "meta", "metadata must be a JSON object");
  static const std::set<std::string> kKeys = {"description", "benefits", "purposes", "statutory"};
  for (const auto& [k, v] : doc.items()) {
    if (!kKeys.count(k)) throw Error(Errc::unknown_key, "meta." + k, "unknown metadata key \"" + k + "\"");
  }
  auto text = [](const Value& obj, const char* key, const std::string& where) -> std::string {
    auto it = obj.find(key);
    if (it == obj.end()) return "";
    if (!it->is_string()) throw Error(Errc::parse_error, where + "." + key, "expected a string");
    return it->get<std::string>();
  };
  m.description = text(doc, "description", "meta");
  m.benefits = text(doc, "benefits", "meta");
  if (auto it = doc.find("purposes"); it != doc.end()) {
    if (!it->is_object()) throw Error(Errc::parse_error, "meta.purposes", "expected an object");
    for (const auto& [node, v] : it->items()) {
      if (!v.is_string()) throw Error(Errc::parse_error, "meta.purposes." + node, "expected a string");
      m.purposes[node] = v.get<std::string>();
    }
  }
  if (auto it = doc.find("statutory"); it != doc.end()) {
    if (!it->is_object()) throw Error(Errc::parse_error, "meta.statutory", "expected an object");
    m.statutory.controller = text(*it, "controller", "meta.statutory");
    m.statutory.purpose = text(*it, "purpose", "meta.statutory");
    m.statutory.retention = text(*it, "retention", "meta.statutory");
    m.statutory.rights = text(*it, "rights", "meta.statutory");
  }
  return m;
}

std::vector<std::string> missing_statutory_fields(const Statutory& s) {
  std::vector<std::string> out;
  if (s.controller.empty()) out.push_back("controller");
  if (s.purpose.empty()) out.push_back("purpose");
  if (s.retention.empty()) out.push_back("retention");
  if (s.rights.empty()) out.push_back("rights");
  return out;
}

namespace {

void require_statutory(const Statutory& s, const std::string& where) {
  const auto missing = missing_statutory_fields(s);
  if (missing.empty()) return;
  std::string list;
  for (const auto& f : missing) list += (list.empty() ? "" : ", ") + f;
  throw Error(Errc::missing_statutory_field, where, list);
}

}  // namespace

Manifest build_manifest(const FlowGraph& flow, const SpecRegistry& registry, const LabelMap& labels,
                        const RiskRating& risk, const ManifestMeta& meta) {
  require_statutory(meta.statutory, "meta.statutory");
  const auto summary = summarize_personal_data(flow, registry, labels);
  std::map<std::string, const NodeRisk*> node_risk;
  for (const auto& n : risk.nodes) node_risk[n.id] = &n;

  Manifest m;
  m.app = {flow.id, flow.name, flow.version, flow.meta.author};
  m.description = meta.description.empty() ? flow.meta.description : meta.description;
  m.benefits = meta.benefits;
  for (const auto& [id, n] : flow.nodes) {
    const auto& spec = registry.at(n.spec);
    if (spec.role == Role::datasource) {
      DatasourceEntry d;
      d.node = id;
      d.spec = spec.id;
      auto purpose = meta.purposes.find(id);
      d.purpose = purpose != meta.purposes.end() ? purpose->second : spec.description;
      if (auto it = n.config.find("period_ms"); it != n.config.end() && it->is_number_integer()) {
        d.period_ms = it->get<std::int64_t>();
      }
      d.period_options = spec.granularity_ms;
      d.atoms = source_label(spec, n);
      m.datasources.push_back(std::move(d));
    }
    if (spec.role == Role::output) m.outputs.push_back({id, spec.id, summary.outputs.at(id)});
    if (spec.risk.exports_off_box) {
      auto r = node_risk.find(id);
      const bool off_box = r != node_risk.end() ? r->second->factors.exports_off_box
                                                : spec.risk.exports_off_box->holds(n.config);
      m.exports.push_back({id, config_string(n.config, "destination"), off_box, summary.exports.at(id)});
    }
    if (spec.risk.physical_actuation) {
      std::string device = config_string(n.config, "device");
      if (auto action = config_string(n.config, "action"); !action.empty()) device += " (" + action + ")";
      m.actuations.push_back({id, std::move(device)});
    }
  }
  m.risk = risk;
  m.statutory = meta.statutory;
  m.layers.summary = layer_one_summary(m);
  m.layers.detail = detail_text(m);
  return m;
}

std::string layer_one_summary(const Manifest& m) {
  bool off_box = false;
  for (const auto& e : m.exports) off_box = off_box || e.off_box;
  return m.app.name + " reads " + std::to_string(m.datasources.size()) +
         " data source(s), sends data off-box: " + (off_box ? "yes" : "no") + ", risk: " + m.risk.band + ".";
}

OrderedValue manifest_to_json(const Manifest& m) {
  OrderedValue doc = OrderedValue::object();
  doc["app"] = {{"id", m.app.id}, {"name", m.app.name}, {"version", m.app.version}, {"author", m.app.author}};
  doc["description"] = m.description;
  doc["benefits"] = m.benefits;
  doc["datasources"] = OrderedValue::array();
  for (const auto& d : m.datasources) {
    OrderedValue e = OrderedValue::object();
    e["node"] = d.node;
    e["spec"] = d.spec;
    e["purpose"] = d.purpose;
    e["period_ms"] = d.period_ms ? OrderedValue(*d.period_ms) : OrderedValue(nullptr);
    e["period_options"] = d.period_options;
    e["atoms"] = ordered_label(d.atoms);
    doc["datasources"].push_back(std::move(e));
  }
  doc["outputs"] = OrderedValue::array();
  for (const auto& o : m.outputs) {
    doc["outputs"].push_back({{"node", o.node}, {"spec", o.spec}, {"atoms", ordered_label(o.atoms)}});
  }
  doc["exports"] = OrderedValue::array();
  for (const auto& e : m.exports) {
    doc["exports"].push_back(
        {{"node", e.node}, {"destination", e.destination}, {"off_box", e.off_box}, {"atoms", ordered_label(e.atoms)}});
  }
  doc["actuations"] = OrderedValue::array();
  for (const auto& a : m.actuations) doc["actuations"].push_back({{"node", a.node}, {"device", a.device}});
  doc["risk"] = to_ordered(risk_to_json(m.risk));
  doc["statutory"] = {{"controller", m.statutory.controller},
                      {"purpose", m.statutory.purpose},
                      {"retention", m.statutory.retention},
                      {"rights", m.statutory.rights}};
  doc["layers"] = {{"summary", m.layers.summary}, {"detail", m.layers.detail}};
  return doc;
}

Manifest manifest_from_json(const Value& doc) {
  if (!doc.is_object()) throw Error(Errc::parse_error, "manifest", "manifest must be a JSON object");
  Manifest m;
  const Value& app = field(doc, "app", "manifest");
  m.app = {str(app, "id", "app"), str(app, "name", "app"), str(app, "version", "app"), str(app, "author", "app")};
  m.description = str(doc, "description", "manifest");
  m.benefits = str(doc, "benefits", "manifest");

  std::size_t i = 0;
  for (const auto& d : arr(doc, "datasources", "manifest")) {
    const std::string where = "datasources[" + std::to_string(i++) + "]";
    DatasourceEntry e;
    e.node = str(d, "node", where);
    e.spec = str(d, "spec", where);
    e.purpose = str(d, "purpose", where);
    const Value& period = field(d, "period_ms", where);
    if (period.is_number_integer()) e.period_ms = period.get<std::int64_t>();
    else if (!period.is_null()) throw Error(Errc::parse_error, where + ".period_ms", "expected an integer or null");
    for (const auto& p : arr(d, "period_options", where)) {
      if (!p.is_number_integer()) throw Error(Errc::parse_error, where + ".period_options", "expected integers");
      e.period_options.push_back(p.get<std::int64_t>());
    }
    e.atoms = atoms(d, where);
    m.datasources.push_back(std::move(e));
  }
  i = 0;
  for (const auto& o : arr(doc, "outputs", "manifest")) {
    const std::string where = "outputs[" + std::to_string(i++) + "]";
    m.outputs.push_back({str(o, "node", where), str(o, "spec", where), atoms(o, where)});
  }
  i = 0;
  for (const auto& x : arr(doc, "exports", "manifest")) {
    const std::string where = "exports[" + std::to_string(i++) + "]";
    const Value& off = field(x, "off_box", where);
    if (!off.is_boolean()) throw Error(Errc::parse_error, where + ".off_box", "expected a boolean");
    m.exports.push_back({str(x, "node", where), str(x, "destination", where), off.get<bool>(), atoms(x, where)});
  }
  i = 0;
  for (const auto& a : arr(doc, "actuations", "manifest")) {
    const std::string where = "actuations[" + std::to_string(i++) + "]";
    m.actuations.push_back({str(a, "node", where), str(a, "device", where)});
  }
  m.risk = risk_from_json(field(doc, "risk", "manifest"));
  const Value& st = field(doc, "statutory", "manifest");
  m.statutory = {str(st, "controller", "statutory"), str(st, "purpose", "statutory"),
                 str(st, "retention", "statutory"), str(st, "rights", "statutory")};
  require_statutory(m.statutory, "statutory");
  const Value& layers = field(doc, "layers", "manifest");
  m.layers = {str(layers, "summary", "layers"), str(layers, "detail", "layers")};
  return m;
}

std::string serialize_manifest(const Manifest& m) { return manifest_to_json(m).dump(2) + "\n"; }

Manifest parse_manifest(std::string_view bytes) {
  Value doc;
  try {
    doc = Value::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse_error, "byte " + std::to_string(e.byte), e.what());
  }
  return manifest_from_json(doc);
}

}  // namespace privflow
