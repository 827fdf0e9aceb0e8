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

#include "eegtext/checkpoint.hpp"

#include <filesystem>
#include <fstream>

namespace eegtext {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kMagic[] = "EEGTEXT_CKPT 1";

void save_checkpoint(const std::string& path, const std::string& model_kind,
                     const json& config, std::uint64_t seed, std::int64_t step,
                     const std::vector<Param<float>*>& params) {
  json header;
  header["model"] = model_kind;
  header["config"] = config;
  header["seed"] = seed;
  header["step"] = step;
  json tensors = json::array();
  for (const auto* p : params)
    tensors.push_back({{"name", p->name}, {"size", p->size()}});
  header["tensors"] = std::move(tensors);

  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << kMagic << '\n' << header.dump() << '\n';
    for (const auto* p : params)
      out.write(reinterpret_cast<const char*>(p->value.data()),
                static_cast<std::streamsize>(sizeof(float)) * p->size());
    if (!out) throw std::runtime_error("short write: " + tmp.string());
  }
  fs::rename(tmp, target);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing checkpoint: " + path);
  std::string magic, header_line;
  if (!std::getline(in, magic) || magic != kMagic)
    throw std::runtime_error("not a checkpoint file: " + path);
  if (!std::getline(in, header_line))
    throw std::runtime_error("checkpoint header missing: " + path);
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint header parse error in " + path + ": " + e.what());
  }
  Checkpoint ckpt;
  ckpt.model_kind = header.value("model", "");
  ckpt.config = header.value("config", json::object());
  ckpt.seed = header.value("seed", std::uint64_t{0});
  ckpt.step = header.value("step", std::int64_t{0});
  for (const auto& t : header.at("tensors")) {
    const auto name = t.value("name", "");
    const auto size = t.value("size", std::int64_t{-1});
    if (name.empty() || size < 0)
      throw std::runtime_error("checkpoint tensor entry invalid in " + path);
    std::vector<float> buf(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(sizeof(float)) * size);
    if (!in) throw std::runtime_error("checkpoint payload truncated in " + path);
    ckpt.names.push_back(name);
    ckpt.tensors.push_back(std::move(buf));
  }
  return ckpt;
}

void restore_params(const Checkpoint& ckpt, const std::vector<Param<float>*>& params) {
  if (ckpt.names.size() != params.size())
    throw std::runtime_error("restore_params: tensor count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto* p = params[i];
    if (ckpt.names[i] != p->name)
      throw std::runtime_error("restore_params: name mismatch at index " + std::to_string(i) +
                               ": checkpoint has '" + ckpt.names[i] + "', model has '" +
                               p->name + "'");
    if (static_cast<Index>(ckpt.tensors[i].size()) != p->size())
      throw std::runtime_error("restore_params: size mismatch for tensor '" + p->name + "'");
    for (Index j = 0; j < p->size(); ++j)
      p->value[j] = ckpt.tensors[i][static_cast<std::size_t>(j)];
  }
}

}  // namespace eegtext
