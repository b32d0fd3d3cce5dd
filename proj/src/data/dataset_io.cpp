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

#include "hme/data/dataset_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>
#include <unistd.h>

#include "hme/errors.hpp"

namespace hme {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* name, std::size_t line) {
  if (!j.is_object()) throw FormatError("expected a JSON object", line);
  auto it = j.find(name);
  if (it == j.end()) throw FormatError(std::string("missing field '") + name + "'", line);
  return *it;
}

std::string string_field(const json& j, const char* name, std::size_t line) {
  const json& v = field(j, name, line);
  if (!v.is_string()) throw FormatError(std::string("field '") + name + "' must be a string", line);
  return v.get<std::string>();
}

template <class Fn>
auto parse_enum(const json& j, const char* name, std::size_t line, Fn fn) {
  const std::string s = string_field(j, name, line);
  try {
    return fn(s);
  } catch (const ContractError& e) {
    throw FormatError(std::string("field '") + name + "': " + e.what(), line);
  }
}

json stream_to_json(const AgentStream& s) {
  return json{{"kind", to_string(s.kind)}, {"dims", s.dims()}, {"frames", matrix_to_json(s.frames)}};
}

AgentStream stream_from_json(const json& j, const char* name, double rate, std::size_t line) {
  const json& obj = field(j, name, line);
  AgentStream s;
  s.kind = parse_enum(obj, "kind", line, agent_kind_from_string);
  const json& dims = field(obj, "dims", line);
  if (!dims.is_number_integer() || dims.get<long long>() < 1)
    throw FormatError(std::string("field '") + name + ".dims' must be a positive integer", line);
  s.frames = matrix_from_json(field(obj, "frames", line), "frames", line);
  if (s.frames.cols() != dims.get<long long>())
    throw FormatError(std::string("field '") + name + ".frames' width disagrees with dims", line);
  s.rate_hz = rate;
  return s;
}

}  // namespace

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const json& j, const char* name, std::size_t line) {
  if (!j.is_array() || j.empty())
    throw FormatError(std::string("field '") + name + "' must be a non-empty array of rows", line);
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw FormatError(std::string("field '") + name + "' has an empty row", line);
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != cols)
      throw FormatError(std::string("field '") + name + "' is ragged at row " + std::to_string(r),
                        line);
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number())
        throw FormatError(std::string("field '") + name + "' has a non-numeric entry", line);
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

json trial_to_json(const InteractionTrial& t) {
  json j;
  j["trial_id"] = t.trial_id;
  j["action"] = to_string(t.action);
  j["pair_type"] = to_string(t.pair_type);
  j["rate_hz"] = t.a1.rate_hz;
  j["leader"] = t.leader ? json(to_string(*t.leader)) : json(nullptr);
  j["a1"] = stream_to_json(t.a1);
  j["a2"] = stream_to_json(t.a2);
  return j;
}

InteractionTrial trial_from_json(const json& j, std::size_t line) {
  InteractionTrial t;
  t.trial_id = string_field(j, "trial_id", line);
  t.action = parse_enum(j, "action", line, action_from_string);
  t.pair_type = parse_enum(j, "pair_type", line, pair_type_from_string);
  const json& rate = field(j, "rate_hz", line);
  if (!rate.is_number() || rate.get<double>() <= 0.0)
    throw FormatError("field 'rate_hz' must be a positive number", line);
  const json& leader = field(j, "leader", line);
  if (!leader.is_null()) t.leader = parse_enum(j, "leader", line, leader_from_string);
  t.a1 = stream_from_json(j, "a1", rate.get<double>(), line);
  t.a2 = stream_from_json(j, "a2", rate.get<double>(), line);
  try {
    validate(t);
  } catch (const ContractError& e) {
    throw FormatError(e.what(), line);
  }
  return t;
}

void save_dataset(const std::vector<InteractionTrial>& trials, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    for (const auto& t : trials) {
      validate(t);
      out << trial_to_json(t).dump() << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<InteractionTrial> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<InteractionTrial> trials;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("invalid JSON: ") + e.what(), line);
    }
    trials.push_back(trial_from_json(j, line));
  }
  return trials;
}

}  // namespace hme
