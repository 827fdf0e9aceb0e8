// Copyright 2026 The eegtext Authors
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
#include <string>
#include <vector>

#include "json.hpp"

#include "eegtext/tensor.hpp"

namespace eegtext {

/// Header plus named float32 tensors, in file order.
struct Checkpoint {
  std::string model_kind;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  std::vector<std::string> names;
  std::vector<std::vector<float>> tensors;
};

/// Writes a checkpoint atomically (temp file + rename): a magic line, a
/// one-line JSON header, then raw float32 payloads in header order.
void save_checkpoint(const std::string& path, const std::string& model_kind,
                     const nlohmann::json& config, std::uint64_t seed, std::int64_t step,
                     const std::vector<Param<float>*>& params);

Checkpoint load_checkpoint(const std::string& path);

/// Copies checkpoint tensors into params; names and sizes must match in
/// order.
void restore_params(const Checkpoint& ckpt, const std::vector<Param<float>*>& params);

}  // namespace eegtext
