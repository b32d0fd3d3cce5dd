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

#include "hme/io/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <unordered_map>

#include "hme/errors.hpp"
#include "hme/io/files.hpp"

namespace hme {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'H', 'M', 'E', 'C', 'K', 'P', 'T', '\0'};

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::uint8_t* at(std::size_t p) const { return bytes_.data() + p; }

 private:
  void need(std::size_t n) const {
    if (n > bytes_.size() - pos_) throw FormatError("checkpoint truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const ParamTensor& Checkpoint::tensor(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw FormatError("checkpoint has no tensor '" + std::string(name) + "'");
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json header{{"format_version", kCheckpointFormatVersion},
                        {"model_kind", ckpt.model_kind},
                        {"config", ckpt.config},
                        {"normalizer", ckpt.normalizer},
                        {"config_hash", ckpt.config_hash}};
  if (!ckpt.extra.is_null()) header["extra"] = ckpt.extra;
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  put<std::uint64_t>(out, ckpt.tensors.size());
  std::uint64_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put<std::uint32_t>(out, 2);
    put<std::int64_t>(out, t.value.rows());
    put<std::int64_t>(out, t.value.cols());
    put<std::uint64_t>(out, offset);
    offset += static_cast<std::uint64_t>(t.value.size());
  }
  for (const auto& t : ckpt.tensors)
    for (Eigen::Index r = 0; r < t.value.rows(); ++r)
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) put<double>(out, t.value(r, c));
  return out;
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  if (in.get_string(8) != std::string(kMagic, 8)) throw FormatError("not a checkpoint file");
  const auto header_len = in.get<std::uint64_t>();
  if (header_len > in.remaining()) throw FormatError("checkpoint header truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.get_string(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  Checkpoint ckpt;
  try {
    const int version = header.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
      throw FormatError("unsupported checkpoint format_version " + std::to_string(version));
    ckpt.model_kind = header.at("model_kind").get<std::string>();
    ckpt.config = header.at("config");
    ckpt.normalizer = header.at("normalizer");
    ckpt.config_hash = header.at("config_hash").get<std::string>();
    if (header.contains("extra")) ckpt.extra = header.at("extra");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }

  struct Entry {
    std::int64_t rows, cols;
    std::uint64_t offset;
  };
  const auto count = in.get<std::uint64_t>();
  if (count > in.remaining()) throw FormatError("checkpoint index truncated");
  std::vector<Entry> index;
  for (std::uint64_t i = 0; i < count; ++i) {
    ParamTensor t;
    t.name = in.get_string(in.get<std::uint32_t>());
    if (in.get<std::uint32_t>() != 2) throw FormatError("checkpoint tensor '" + t.name + "' is not rank 2");
    Entry e{in.get<std::int64_t>(), in.get<std::int64_t>(), in.get<std::uint64_t>()};
    if (e.rows < 0 || e.cols < 0) throw FormatError("checkpoint tensor '" + t.name + "' has a negative dim");
    ckpt.tensors.push_back(std::move(t));
    index.push_back(e);
  }
  const std::size_t data_start = in.pos();
  const std::size_t data_doubles = in.remaining() / sizeof(double);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const Entry& e = index[i];
    const auto n = static_cast<std::uint64_t>(e.rows * e.cols);
    if (e.offset + n > data_doubles) throw FormatError("checkpoint data truncated");
    Mat m(e.rows, e.cols);
    const std::uint8_t* base = in.at(data_start + e.offset * sizeof(double));
    for (std::int64_t r = 0; r < e.rows; ++r)
      for (std::int64_t c = 0; c < e.cols; ++c)
        std::memcpy(&m(r, c), base + (r * e.cols + c) * sizeof(double), sizeof(double));
    ckpt.tensors[i].value = std::move(m);
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  write_file_atomic(path, bytes);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return deserialize_checkpoint(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void restore_params(const Checkpoint& ckpt, std::span<ParamTensor* const> params) {
  std::unordered_map<std::string, const ParamTensor*> by_name;
  for (const auto& t : ckpt.tensors) by_name[t.name] = &t;
  for (ParamTensor* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw FormatError("checkpoint is missing tensor '" + p->name + "'");
    const Mat& v = it->second->value;
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols())
      throw FormatError("checkpoint tensor '" + p->name + "' has the wrong shape");
    p->value = v;
  }
}

std::vector<ParamTensor> snapshot_params(std::span<ParamTensor* const> params) {
  std::vector<ParamTensor> out;
  out.reserve(params.size());
  for (const ParamTensor* p : params) out.push_back(*p);
  return out;
}

}  // namespace hme
