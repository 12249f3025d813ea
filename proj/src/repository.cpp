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

#include "scenforge/repository.hpp"

#include <algorithm>
#include <json.hpp>

#include "scenforge/errors.hpp"
#include "scenforge/util.hpp"

namespace scenforge::repo {

namespace {

using nlohmann::json;

const struct {
  TierName name;
  const char* str;
} kTierTable[] = {
    {TierName::RoadTopology, "RoadTopology"},
    {TierName::TransportationFacilities, "TransportationFacilities"},
    {TierName::TemporaryChanges, "TemporaryChanges"},
    {TierName::TrafficParticipants, "TrafficParticipants"},
    {TierName::Climate, "Climate"},
    {TierName::EgoVehicle, "EgoVehicle"},
};

void check_invariants(const RepositoryConfig& config) {
  if (config.tiers.size() != 6) {
    throw SchemaError("repository: expected exactly 6 tiers, got " +
                      std::to_string(config.tiers.size()));
  }
  std::set<int> priorities;
  std::set<TierName> names;
  for (const Tier& t : config.tiers) {
    priorities.insert(t.priority);
    names.insert(t.name);
  }
  if (names.size() != 6) throw SchemaError("repository: duplicate tier name");
  if (priorities != std::set<int>{1, 2, 3, 4, 5, 6}) {
    throw SchemaError("repository: tier priorities must be a permutation of 1..6");
  }
  int climate_prio = 0;
  int topology_prio = 0;
  for (const Tier& t : config.tiers) {
    if (t.name == TierName::Climate) climate_prio = t.priority;
    if (t.name == TierName::RoadTopology) topology_prio = t.priority;
  }
  if (std::max(climate_prio, topology_prio) > 2) {
    throw SchemaError("repository: Climate and RoadTopology must hold ranks 1 and 2");
  }

  std::set<std::string> slot_names;
  std::map<TierName, std::set<std::string>> per_tier_vocab;
  for (const ElementSlot& s : config.slots) {
    if (!slot_names.insert(s.slot_name).second) {
      throw SchemaError("repository: duplicate slot_name '" + s.slot_name + "'");
    }
    if (s.vocabulary.empty()) {
      throw SchemaError("repository: slot '" + s.slot_name + "' has empty vocabulary");
    }
    std::set<std::string> seen;
    for (const std::string& v : s.vocabulary) {
      if (!seen.insert(v).second) {
        throw SchemaError("repository: slot '" + s.slot_name +
                          "' lists element '" + v + "' twice");
      }
      // Canonical strings must be disjoint across slots within one tier.
      if (v != kNone && !per_tier_vocab[s.tier].insert(v).second) {
        throw SchemaError("repository: element '" + v +
                          "' appears in two slots of tier " +
                          tier_name_str(s.tier) + " (slot '" + s.slot_name + "')");
      }
    }
  }
  for (const auto& [canonical, surfaces] : config.synonyms) {
    bool found = false;
    for (const ElementSlot& s : config.slots) {
      if (std::find(s.vocabulary.begin(), s.vocabulary.end(), canonical) !=
          s.vocabulary.end()) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw SchemaError("repository: synonym key '" + canonical +
                        "' is not in any slot vocabulary");
    }
    (void)surfaces;
  }
}

}  // namespace

const char* tier_name_str(TierName name) {
  for (const auto& e : kTierTable) {
    if (e.name == name) return e.str;
  }
  return "?";
}

std::optional<TierName> tier_name_from_str(const std::string& s) {
  for (const auto& e : kTierTable) {
    if (s == e.str) return e.name;
  }
  return std::nullopt;
}

const ElementSlot* RepositoryConfig::find_slot(const std::string& slot_name) const {
  for (const ElementSlot& s : slots) {
    if (s.slot_name == slot_name) return &s;
  }
  return nullptr;
}

const ElementSlot& RepositoryConfig::slot(const std::string& slot_name) const {
  const ElementSlot* s = find_slot(slot_name);
  if (!s) throw SchemaError("repository: unknown slot '" + slot_name + "'");
  return *s;
}

int RepositoryConfig::tier_priority(TierName name) const {
  for (const Tier& t : tiers) {
    if (t.name == name) return t.priority;
  }
  throw SchemaError("repository: tier not configured");
}

bool is_canonical(const CanonResult& r) { return std::holds_alternative<Canonical>(r); }
bool is_novel(const CanonResult& r) { return std::holds_alternative<Novel>(r); }
bool is_rejected(const CanonResult& r) { return std::holds_alternative<Rejected>(r); }

const std::string& canon_value(const CanonResult& r) {
  if (const auto* c = std::get_if<Canonical>(&r)) return c->value;
  if (const auto* n = std::get_if<Novel>(&r)) return n->value;
  throw SchemaError("canon_value on Rejected result");
}

RepositoryConfig repository_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("repository: ") + e.what());
  }
  RepositoryConfig config;
  try {
    config.version = doc.at("version").get<std::string>();
    for (const auto& jt : doc.at("tiers")) {
      auto name = tier_name_from_str(jt.at("name").get<std::string>());
      if (!name) {
        throw SchemaError("repository: unknown tier name '" +
                          jt.at("name").get<std::string>() + "'");
      }
      config.tiers.push_back({*name, jt.at("priority").get<int>()});
    }
    for (const auto& js : doc.at("slots")) {
      ElementSlot slot;
      auto tier = tier_name_from_str(js.at("tier").get<std::string>());
      if (!tier) {
        throw SchemaError("repository: slot '" + js.at("name").get<std::string>() +
                          "' names unknown tier");
      }
      slot.tier = *tier;
      slot.slot_name = js.at("name").get<std::string>();
      for (const auto& v : js.at("vocabulary")) {
        slot.vocabulary.push_back(v.get<std::string>());
      }
      slot.allows_novel = js.value("allows_novel", false);
      config.slots.push_back(std::move(slot));
    }
    if (doc.contains("synonyms")) {
      for (const auto& [key, val] : doc.at("synonyms").items()) {
        std::vector<std::string> surfaces;
        for (const auto& s : val) surfaces.push_back(s.get<std::string>());
        config.synonyms[key] = std::move(surfaces);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("repository: ") + e.what());
  }
  check_invariants(config);
  return config;
}

RepositoryConfig load_repository(const std::string& path) {
  return repository_from_json_text(util::read_file(path));
}

CanonResult canonicalize(const RepositoryConfig& config, const ElementSlot& slot,
                         const std::string& surface) {
  const std::string norm = util::normalize_token(surface);
  for (const std::string& v : slot.vocabulary) {
    if (util::normalize_token(v) == norm) return Canonical{v};
  }
  for (const std::string& v : slot.vocabulary) {
    auto it = config.synonyms.find(v);
    if (it == config.synonyms.end()) continue;
    for (const std::string& s : it->second) {
      if (util::normalize_token(s) == norm) return Canonical{v};
    }
  }
  if (slot.allows_novel) return Novel{util::trim(surface)};
  return Rejected{};
}

std::vector<const ElementSlot*> slots_in_priority_order(const RepositoryConfig& config) {
  std::vector<const ElementSlot*> out;
  out.reserve(config.slots.size());
  for (const ElementSlot& s : config.slots) out.push_back(&s);
  std::stable_sort(out.begin(), out.end(),
                   [&config](const ElementSlot* a, const ElementSlot* b) {
                     return config.tier_priority(a->tier) < config.tier_priority(b->tier);
                   });
  return out;
}

}  // namespace scenforge::repo
