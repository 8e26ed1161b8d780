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
#include <string_view>
#include <utility>
#include <vector>

namespace convscreen {

/// 64-bit FNV-1a over a byte string, optionally seeded by xor-ing the basis.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0) {
  std::uint64_t h = 0xcbf29ce484222325ull ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// splitmix64 finalizer. Used to whiten hash values and derive sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Deterministic sub-seed for a named purpose (split name, epoch, trial, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  return splitmix64(seed ^ fnv1a64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t index) {
  return splitmix64(derive_seed(seed, tag) ^ splitmix64(index));
}

/// Hex rendering of a 64-bit digest, 16 lowercase digits.
std::string hex64(std::uint64_t value);

/// FNV-1a digest over the raw bytes of a double vector. Bit-exact
/// fingerprint of model parameters on one machine/build.
inline std::uint64_t digest_doubles(const std::vector<double>& values) {
  return fnv1a64(std::string_view(
      reinterpret_cast<const char*>(values.data()),
      values.size() * sizeof(double)));
}

/// FNV-1a digest of a file's bytes. Throws std::runtime_error if unreadable.
std::uint64_t digest_file(const std::string& path);

// Draw helpers on top of std::mt19937_64. The engine itself is fully
// specified by the standard; the library distributions are not, so all
// randomized code in this project draws through these instead.

template <typename Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  // Modulo bias is < n / 2^64, irrelevant at the sizes used here.
  return rng() % n;
}

/// Uniform double in [0,1) with 53 random bits.
template <typename Rng>
double uniform_real01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo,hi).
template <typename Rng>
double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_real01(rng);
}

/// Uniform integer in [lo,hi] inclusive.
template <typename Rng>
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(
                  uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Fisher-Yates shuffle driven by uniform_below.
template <typename T, typename Rng>
void shuffle_inplace(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace convscreen
