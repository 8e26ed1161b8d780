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

#include "convscreen/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace convscreen {

std::string manifest_json(const RunManifest& manifest) {
  nlohmann::json j;
  j["tool_version"] = manifest.tool_version;
  j["subcommand"] = manifest.subcommand;
  j["seed"] = manifest.seed;
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : manifest.config) config[k] = v;
  j["config"] = config;
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [path, digest] : manifest.inputs) inputs[path] = digest;
  j["inputs"] = inputs;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest " + path);
  out << manifest_json(manifest);
  if (!out) throw std::runtime_error("write failed for manifest " + path);
}

}  // namespace convscreen
