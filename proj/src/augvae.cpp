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

#include "eegtext/augvae.hpp"

#include <fstream>

#include "json.hpp"

namespace eegtext {

using nlohmann::json;

void LatentStats::save(const std::string& path) const {
  json j;
  j["latent"] = latent;
  j["channels"] = channels;
  j["window"] = window;
  json words_j = json::object();
  for (const auto& [token, ws] : words) {
    json w;
    w["count"] = ws.count;
    w["mean"] = std::vector<double>(ws.mean.data(), ws.mean.data() + ws.mean.size());
    w["sd"] = std::vector<double>(ws.sd.data(), ws.sd.data() + ws.sd.size());
    words_j[token] = std::move(w);
  }
  j["words"] = std::move(words_j);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

LatentStats LatentStats::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing latent stats file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("latent stats parse error in " + path + ": " + e.what());
  }
  LatentStats stats;
  stats.latent = j.value("latent", Index{0});
  stats.channels = j.value("channels", Index{0});
  stats.window = j.value("window", Index{0});
  if (stats.latent < 1 || stats.channels < 1 || stats.window < 1)
    throw std::runtime_error("latent stats header invalid in " + path);
  for (const auto& [token, w] : j.at("words").items()) {
    WordLatentStats ws;
    ws.count = w.value("count", std::int64_t{0});
    const auto mean = w.at("mean").get<std::vector<double>>();
    const auto sd = w.at("sd").get<std::vector<double>>();
    if (static_cast<Index>(mean.size()) != stats.latent ||
        static_cast<Index>(sd.size()) != stats.latent)
      throw std::runtime_error("latent stats for word '" + token + "' have wrong length");
    ws.mean = Eigen::Map<const Eigen::ArrayXd>(mean.data(), stats.latent);
    ws.sd = Eigen::Map<const Eigen::ArrayXd>(sd.data(), stats.latent);
    stats.words[token] = std::move(ws);
  }
  return stats;
}

}  // namespace eegtext
