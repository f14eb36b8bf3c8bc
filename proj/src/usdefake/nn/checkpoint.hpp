// Copyright 2026 The usdefake Authors. All Rights Reserved.
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

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "usdefake/nn/matrix.hpp"

namespace usdefake::nn {

// Flat binary parameter container (all integers little-endian):
//   magic "USDFCKPT" | u32 version | u32 header_len | header bytes (JSON)
//   u32 entry_count
//   per entry: u32 name_len | name | u64 rows | u64 cols | u8 precision (4|8)
//              | rows*cols IEEE-754 values
inline constexpr char kCheckpointMagic[8] = {'U', 'S', 'D', 'F', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  std::variant<Matrix<float>, Matrix<double>> data;
};

struct Checkpoint {
  std::string header;
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry* find(std::string_view name) const;

  template <typename T>
  void add(std::string name, const Matrix<T>& m) {
    entries.push_back({std::move(name), m});
  }

  /// Entry converted to T; throws DataError when absent.
  template <typename T>
  Matrix<T> get(std::string_view name) const {
    const CheckpointEntry* e = find(name);
    if (!e) throw DataError("checkpoint: missing entry '" + std::string(name) + "'");
    return std::visit([](const auto& m) { return m.template cast<T>(); }, e->data);
  }
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace usdefake::nn
