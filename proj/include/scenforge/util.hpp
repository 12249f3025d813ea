// Copyright 2025 Scenforge Contributors
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

#ifndef SCENFORGE_UTIL_HPP
#define SCENFORGE_UTIL_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace scenforge::util {

// mt19937_64 with hand-rolled bounded draws and shuffle. The standard leaves
// uniform_int_distribution and std::shuffle implementation-defined, which
// would break cross-toolchain reproducibility of seeded outputs.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, bound) via 128-bit multiply; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double in_range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<size_t>(below(v.size()))];
  }

private:
  std::mt19937_64 eng_;
};

// Lowercases ASCII, trims, drops punctuation and collapses runs of
// whitespace/underscores/hyphens to single '_'. This is the normal form used
// for vocabulary matching ("T-Junction" -> "t_junction").
std::string normalize_token(const std::string& s);

std::string trim(const std::string& s);
std::string to_lower(const std::string& s);

std::vector<std::string> split(const std::string& s, char sep);

// FNV-1a, 64 bit. Used for scripted-backend fingerprints and source hashes.
std::uint64_t fnv1a64(const std::string& s);
std::string fnv1a64_hex(const std::string& s);

// Shortest round-trip decimal text for a double, locale-independent.
// Integral values render with one trailing ".0" so XML attributes stay
// visually typed ("20.0" not "20").
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Deterministic 64-bit stream splitter: child seed for a named substream.
std::uint64_t substream_seed(std::uint64_t seed, const std::string& name);

}  // namespace scenforge::util

#endif  // SCENFORGE_UTIL_HPP
