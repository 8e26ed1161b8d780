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
#include <utility>
#include <vector>

namespace convscreen {

inline constexpr const char* kToolVersion = "convscreen 1.0.0";

/// Record of one tool invocation: every resolved option, the digests of
/// every input file, and the seed. Written before any training output and
/// sufficient to reproduce the run byte for byte on the same build. No
/// timestamps, no environment capture.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> digest
  std::uint64_t seed = 0;
};

/// Canonical JSON rendering; byte-identical for equal manifests.
std::string manifest_json(const RunManifest& manifest);

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace convscreen
