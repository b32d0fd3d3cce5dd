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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hme/nn/tensor.hpp"

namespace hme {

inline constexpr int kCheckpointFormatVersion = 1;

// File layout, all integers little-endian:
//   "HMECKPT\0" | u64 header_len | header JSON
//   | u64 block_count | per block: u32 name_len, name, u32 rank, i64 dims[rank], u64 offset
//   | float64 data (row-major per block; offset counts doubles from the data start)
struct Checkpoint {
  std::string model_kind;
  nlohmann::json config;
  nlohmann::json normalizer;  // null when absent
  nlohmann::json extra;       // null when absent
  std::string config_hash;
  std::vector<ParamTensor> tensors;

  const ParamTensor& tensor(std::string_view name) const;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies values out of `ckpt` into same-named, same-shaped parameters.
void restore_params(const Checkpoint& ckpt, std::span<ParamTensor* const> params);
std::vector<ParamTensor> snapshot_params(std::span<ParamTensor* const> params);

}  // namespace hme
