// Copyright 2026 The HME Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace hme::testing {

// Checks `value` against a schema node using the keywords the protocol schema uses.
inline bool schema_accepts(const nlohmann::json& root, const nlohmann::json& node,
                           const nlohmann::json& value) {
  using json = nlohmann::json;
  if (node.contains("$ref")) {
    std::string ref = node["$ref"].get<std::string>().substr(2);
    json::json_pointer p("/" + ref);
    return schema_accepts(root, root.at(p), value);
  }
  if (node.contains("oneOf")) {
    int hits = 0;
    for (const auto& s : node["oneOf"]) hits += schema_accepts(root, s, value) ? 1 : 0;
    return hits == 1;
  }
  if (node.contains("const") && value != node["const"]) return false;
  if (node.contains("enum")) {
    bool found = false;
    for (const auto& e : node["enum"]) found = found || e == value;
    if (!found) return false;
  }
  if (node.contains("type")) {
    const std::string t = node["type"];
    const bool ok = (t == "object" && value.is_object()) || (t == "array" && value.is_array()) ||
                    (t == "string" && value.is_string()) || (t == "boolean" && value.is_boolean()) ||
                    (t == "integer" && value.is_number_integer()) || (t == "number" && value.is_number());
    if (!ok) return false;
  }
  if (value.is_number()) {
    if (node.contains("minimum") && value.get<double>() < node["minimum"].get<double>()) return false;
    if (node.contains("maximum") && value.get<double>() > node["maximum"].get<double>()) return false;
  }
  if (value.is_array()) {
    if (node.contains("minItems") && value.size() < node["minItems"].get<std::size_t>()) return false;
    if (node.contains("maxItems") && value.size() > node["maxItems"].get<std::size_t>()) return false;
    if (node.contains("items"))
      for (const auto& v : value)
        if (!schema_accepts(root, node["items"], v)) return false;
  }
  if (value.is_object()) {
    if (node.contains("required"))
      for (const auto& k : node["required"])
        if (!value.contains(k.get<std::string>())) return false;
    const json props = node.value("properties", json::object());
    for (const auto& [k, v] : value.items()) {
      if (props.contains(k)) {
        if (!schema_accepts(root, props[k], v)) return false;
      } else if (node.value("additionalProperties", true) == false) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace hme::testing
