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

#ifndef SCENFORGE_REPOSITORY_HPP
#define SCENFORGE_REPOSITORY_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace scenforge::repo {

// Element slots that can be absent in a description carry this sentinel.
inline const std::string kNone = "none";

enum class TierName {
  RoadTopology,
  TransportationFacilities,
  TemporaryChanges,
  TrafficParticipants,
  Climate,
  EgoVehicle,
};

const char* tier_name_str(TierName name);
std::optional<TierName> tier_name_from_str(const std::string& s);

struct Tier {
  TierName name;
  int priority;  // 1 = matched first
};

struct ElementSlot {
  TierName tier;
  std::string slot_name;                // e.g. "RT.topology"
  std::vector<std::string> vocabulary;  // ordered canonical strings
  bool allows_novel = false;
};

struct RepositoryConfig {
  std::string version;
  std::vector<Tier> tiers;
  std::vector<ElementSlot> slots;
  // canonical string -> accepted surface forms
  std::map<std::string, std::vector<std::string>> synonyms;

  const ElementSlot* find_slot(const std::string& slot_name) const;
  const ElementSlot& slot(const std::string& slot_name) const;  // throws SchemaError
  int tier_priority(TierName name) const;
};

struct Canonical {
  std::string value;
  bool operator==(const Canonical&) const = default;
};
struct Novel {
  std::string value;
  bool operator==(const Novel&) const = default;
};
struct Rejected {
  bool operator==(const Rejected&) const = default;
};
using CanonResult = std::variant<Canonical, Novel, Rejected>;

bool is_canonical(const CanonResult& r);
bool is_novel(const CanonResult& r);
bool is_rejected(const CanonResult& r);
// The carried string; throws on Rejected.
const std::string& canon_value(const CanonResult& r);

// Loads and validates a repository config file (JSON). Throws ParseError on
// malformed input, SchemaError naming the offending slot on invariant breach.
RepositoryConfig load_repository(const std::string& path);
RepositoryConfig repository_from_json_text(const std::string& text);

// Case-, whitespace- and punctuation-insensitive vocabulary match.
// Exact-after-normalization first, then the synonym table. No fuzzy matching;
// unresolved surface forms are Novel when the slot allows it, else Rejected.
CanonResult canonicalize(const RepositoryConfig& config, const ElementSlot& slot,
                         const std::string& surface);

// Slots sorted by (tier priority, declaration order); stable.
std::vector<const ElementSlot*> slots_in_priority_order(const RepositoryConfig& config);

}  // namespace scenforge::repo

#endif  // SCENFORGE_REPOSITORY_HPP
