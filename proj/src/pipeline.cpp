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

#include "scenforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <json.hpp>

#include "scenforge/errors.hpp"
#include "scenforge/util.hpp"

namespace scenforge::pipeline {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* stage_str(Stage s) {
  switch (s) {
    case Stage::BP: return "BP";
    case Stage::FS: return "FS";
    case Stage::CoT: return "CoT";
    case Stage::SAC: return "SAC";
    case Stage::SC: return "SC";
  }
  return "?";
}

std::string stage_tag(Stage s) { return util::to_lower(stage_str(s)); }

std::optional<Stage> stage_from_str(const std::string& s) {
  for (Stage st : {Stage::BP, Stage::FS, Stage::CoT, Stage::SAC, Stage::SC}) {
    if (s == stage_str(st)) return st;
  }
  return std::nullopt;
}

bool PipelineConfig::has_stage(Stage s) const {
  return std::find(stages.begin(), stages.end(), s) != stages.end();
}

void PipelineConfig::check() const {
  static const std::vector<Stage> kOrder = {Stage::BP, Stage::FS, Stage::CoT,
                                            Stage::SAC, Stage::SC};
  if (stages.empty() || stages.size() > kOrder.size()) {
    throw ConfigError("pipeline: stages must be a non-empty prefix of BP-FS-CoT-SAC-SC");
  }
  for (size_t i = 0; i < stages.size(); ++i) {
    if (stages[i] != kOrder[i]) {
      throw ConfigError("pipeline: stages must be a prefix of BP-FS-CoT-SAC-SC "
                        "(found " + std::string(stage_str(stages[i])) +
                        " at position " + std::to_string(i) + ")");
    }
  }
  if (sc_paths < 1) throw ConfigError("pipeline: sc_paths must be >= 1");
  if (has_stage(Stage::SC) && sc_paths < 3) {
    throw ConfigError("pipeline: self-consistency needs sc_paths >= 3");
  }
}

namespace {

const char* kDefaultRolePrompt =
    "Assuming you are an expert in autonomous driving testing, your task is to "
    "generate scenario representation from the following given testing scenario "
    "description text based on the Domain-Specific Language.";

const char* kRepositoryIntro =
    "The Hierarchical Scenario Repository provides a dictionary of scenario "
    "components corresponding to each element that you can choose from. When "
    "creating scenario representation, please first consider the following "
    "elements for each subcomponent. If there is no element that can describe a "
    "similar meaning, then create a new element yourself.";

const char* kChainOfThoughtScaffold =
    "Let's think step by step, following this worked example for the text "
    "\"Unprotected left turn for traffic vehicle\":\n"
    "1. \"left turn\" means the vehicle approaches the intersection, so we choose "
    "\"intersection\" as the road topology and \"turn_left\" as the global "
    "behavior;\n"
    "2. \"Unprotected\" means there is no specific traffic signal, such as a green "
    "arrow, to protect the turn, so we do not choose \"traffic_light\" as the "
    "traffic sign;\n"
    "3. \"Unprotected left turn\" means the turning vehicle does not have the "
    "right-of-way and must yield to oncoming traffic from the opposite direction, "
    "so we choose \"yield\" as the longitudinal oracle.\n"
    "Apply the same stepwise analysis to the target text before writing the final "
    "scenario representation.";

rep::ScenarioRepresentation left_turn_example() {
  rep::ScenarioRepresentation r;
  r.road_topology.topology = "intersection";
  r.road_topology.lanes = "two_lanes";
  r.ego_vehicle.vehicle_type = "car";
  r.ego_vehicle.global_behavior = "go_forward";
  rep::TrafficParticipant p;
  p.participant_type = "car";
  p.position_relation = "opposite";
  p.longitudinal_oracle = "yield";
  p.global_behavior = "turn_left";
  r.traffic_participants.push_back(p);
  r.source_text = "Unprotected left turn for traffic vehicle";
  return r;
}

rep::ScenarioRepresentation braking_lead_example() {
  rep::ScenarioRepresentation r;
  r.climate.weather_type = "rainy";
  r.climate.density = "medium";
  r.climate.time_of_day = "nighttime";
  r.road_topology.topology = "straight";
  r.road_topology.lanes = "two_lanes";
  r.ego_vehicle.vehicle_type = "car";
  r.ego_vehicle.global_behavior = "go_forward";
  rep::TrafficParticipant p;
  p.participant_type = "car";
  p.position_relation = "front";
  p.longitudinal_oracle = "decelerate";
  p.lateral_oracle = "keep_lane";
  p.global_behavior = "go_forward";
  r.traffic_participants.push_back(p);
  r.source_text =
      "On a rainy night the ego vehicle follows a car that suddenly decelerates";
  return r;
}

std::string repository_dictionary(const repo::RepositoryConfig& config) {
  ordered_json dict;
  for (const repo::ElementSlot* slot : repo::slots_in_priority_order(config)) {
    dict[slot->slot_name] = slot->vocabulary;
  }
  return dict.dump(2);
}

Stage highest_composed_stage(const PipelineConfig& config) {
  Stage best = Stage::BP;
  for (Stage s : {Stage::FS, Stage::CoT}) {
    if (config.has_stage(s)) best = s;
  }
  return best;
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig config;
  config.role_prompt = kDefaultRolePrompt;
  config.few_shot_examples.push_back(
      {"Unprotected left turn for traffic vehicle", left_turn_example()});
  config.few_shot_examples.push_back(
      {"On a rainy night the ego vehicle follows a car that suddenly decelerates",
       braking_lead_example()});
  return config;
}

PipelineConfig PipelineConfig::from_ablation(const std::string& token) {
  PipelineConfig config = defaults();
  if (token == "full" || token == "BP-FS-CoT-SAC-SC") {
    return config;
  }
  std::vector<Stage> stages;
  for (const std::string& part : util::split(token, '-')) {
    auto s = stage_from_str(part);
    if (!s) throw ConfigError("unknown ablation token '" + token + "'");
    stages.push_back(*s);
  }
  config.stages = stages;
  config.check();
  return config;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(util::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("pipeline config: ") + e.what());
  }
  PipelineConfig config = defaults();
  try {
    if (doc.contains("stages")) {
      config.stages.clear();
      for (const auto& s : doc.at("stages")) {
        auto st = stage_from_str(s.get<std::string>());
        if (!st) throw ConfigError("pipeline config: unknown stage " + s.dump());
        config.stages.push_back(*st);
      }
    }
    config.sc_paths = doc.value("sc_paths", config.sc_paths);
    config.single_path_temperature =
        doc.value("single_path_temperature", config.single_path_temperature);
    config.sc_temperature = doc.value("sc_temperature", config.sc_temperature);
    if (doc.contains("role_prompt")) config.role_prompt = doc.at("role_prompt");
    if (doc.contains("few_shot_examples")) {
      config.few_shot_examples.clear();
      for (const auto& ex : doc.at("few_shot_examples")) {
        FewShotExample fse;
        fse.text = ex.at("text").get<std::string>();
        fse.representation = rep::deserialize(ex.at("representation").dump());
        config.few_shot_examples.push_back(std::move(fse));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("pipeline config: ") + e.what());
  }
  config.check();
  return config;
}

std::string build_prompt(Stage stage, const std::string& text,
                         const PipelineConfig& config,
                         const repo::RepositoryConfig& repo,
                         const std::optional<rep::ScenarioRepresentation>& prior) {
  if (!config.has_stage(stage)) {
    throw ConfigError("build_prompt: stage " + std::string(stage_str(stage)) +
                      " is not enabled in this pipeline configuration");
  }
  if (stage == Stage::SAC && !prior) {
    throw ConfigError("build_prompt: SAC requires a prior draft representation");
  }
  if (stage != Stage::SAC && prior) {
    throw ConfigError("build_prompt: only SAC takes a prior draft");
  }

  std::string out = config.role_prompt;
  out += "\n\n";
  out += kRepositoryIntro;
  out += "\n\nHierarchical Scenario Repository dictionary:\n";
  out += repository_dictionary(repo);
  out += "\n";

  if (stage == Stage::SAC) {
    out += "\nReview the draft scenario representation below.\n"
           "1. Knowledge validation: check that every element in the draft is "
           "consistent with the input testing scenario text; correct any "
           "inconsistencies.\n"
           "2. Syntax harmonization: check that every element comes from the "
           "scenario repository dictionary above; if no close element exists for "
           "what the text describes, keep your own wording. Correct the output to "
           "the dictionary data structure format and return only the JSON.\n";
    out += "\nDraft scenario representation:\n";
    out += rep::serialize(*prior);
    out += "\nInput testing scenario text:\n";
    out += text;
    return out;
  }

  // BP/FS/CoT compose cumulatively.
  if (stage == Stage::FS || stage == Stage::CoT) {
    out += "\nBelow are " + std::to_string(config.few_shot_examples.size()) +
           " examples of the input testing scenario texts and the corresponding "
           "scenario representations:\n";
    int i = 1;
    for (const FewShotExample& ex : config.few_shot_examples) {
      out += "\nInput " + std::to_string(i) + ": " + ex.text + "\n";
      out += "Output " + std::to_string(i) + ":\n" + rep::serialize(ex.representation);
      ++i;
    }
  }
  if (stage == Stage::CoT) {
    out += "\n";
    out += kChainOfThoughtScaffold;
    out += "\n";
  }
  out += "\nConvert the following testing scenario text into the corresponding "
         "scenario representation. Return the representation as a JSON "
         "dictionary.\n\nTesting scenario text:\n";
  out += text;
  return out;
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

namespace {

// String-aware balanced-brace scan; returns the object's [begin, end) or
// nothing if no balanced object starts at or after `from`.
std::optional<std::pair<size_t, size_t>> find_balanced_object(const std::string& s,
                                                              size_t from) {
  size_t start = s.find('{', from);
  if (start == std::string::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = start; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}') {
      if (--depth == 0) return std::make_pair(start, i + 1);
    }
  }
  return std::nullopt;
}

std::string locate_json_object(const std::string& raw) {
  // Fenced blocks first.
  size_t pos = 0;
  while ((pos = raw.find("```", pos)) != std::string::npos) {
    size_t body = pos + 3;
    size_t end = raw.find("```", body);
    if (end == std::string::npos) break;
    if (auto span = find_balanced_object(raw, body); span && span->second <= end) {
      return raw.substr(span->first, span->second - span->first);
    }
    pos = end + 3;
  }
  if (auto span = find_balanced_object(raw, 0)) {
    return raw.substr(span->first, span->second - span->first);
  }
  throw ExtractionError("no JSON object found in model response");
}

std::string scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return repo::kNone;
  return v.dump();
}

std::string read_key(const json& obj, std::initializer_list<const char*> aliases) {
  for (const char* key : aliases) {
    if (obj.contains(key)) {
      std::string v = util::trim(scalar_to_string(obj.at(key)));
      if (!v.empty()) return v;
    }
  }
  return "";
}

std::string canonicalize_or_throw(const repo::RepositoryConfig& repo,
                                  const std::string& slot_name,
                                  const std::string& surface,
                                  std::vector<std::string>* defaulted) {
  if (surface.empty() || util::normalize_token(surface) == repo::kNone ||
      util::normalize_token(surface) == "null") {
    if (defaulted) defaulted->push_back(slot_name);
    return repo::kNone;
  }
  const repo::ElementSlot& slot = repo.slot(slot_name);
  repo::CanonResult res = repo::canonicalize(repo, slot, surface);
  if (repo::is_rejected(res)) {
    throw RejectedElementError("slot '" + slot_name + "': value '" + surface +
                               "' is not canonical and has no synonym");
  }
  return repo::canon_value(res);
}

}  // namespace

ExtractionResult extract_representation(const std::string& raw,
                                        const repo::RepositoryConfig& repo) {
  if (util::trim(raw).empty()) throw ExtractionError("empty model response");
  const std::string object_text = locate_json_object(raw);
  json doc;
  try {
    doc = json::parse(object_text);
  } catch (const json::parse_error& e) {
    throw ExtractionError(std::string("located object is not valid JSON: ") + e.what());
  }

  ExtractionResult out;
  auto& r = out.representation;
  auto section = [&doc](const char* name) -> json {
    return doc.contains(name) && doc.at(name).is_object() ? doc.at(name) : json::object();
  };

  const json climate = section("climate");
  r.climate.weather_type = canonicalize_or_throw(
      repo, "C.type", read_key(climate, {"weather_type", "type", "weather"}),
      &out.defaulted_slots);
  r.climate.density = canonicalize_or_throw(repo, "C.density",
                                            read_key(climate, {"density"}),
                                            &out.defaulted_slots);
  r.climate.time_of_day = canonicalize_or_throw(
      repo, "C.time", read_key(climate, {"time_of_day", "time"}), &out.defaulted_slots);

  const json rt = section("road_topology");
  r.road_topology.topology = canonicalize_or_throw(
      repo, "RT.topology", read_key(rt, {"topology"}), &out.defaulted_slots);
  r.road_topology.lanes = canonicalize_or_throw(repo, "RT.lanes",
                                                read_key(rt, {"lanes"}),
                                                &out.defaulted_slots);

  const json tf = section("transportation_facilities");
  r.transportation_facilities.road_marker = canonicalize_or_throw(
      repo, "TF.road_marker", read_key(tf, {"road_marker", "road_markers"}),
      &out.defaulted_slots);
  r.transportation_facilities.traffic_sign = canonicalize_or_throw(
      repo, "TF.traffic_sign", read_key(tf, {"traffic_sign", "traffic_signs"}),
      &out.defaulted_slots);

  const json tc = section("temporary_changes");
  r.temporary_changes.change_type = canonicalize_or_throw(
      repo, "TC.type", read_key(tc, {"change_type", "type"}), &out.defaulted_slots);
  r.temporary_changes.position_relation = canonicalize_or_throw(
      repo, "TC.position_relation", read_key(tc, {"position_relation", "position"}),
      &out.defaulted_slots);

  const json ev = section("ego_vehicle");
  r.ego_vehicle.vehicle_type = canonicalize_or_throw(
      repo, "EV.type", read_key(ev, {"vehicle_type", "type"}), &out.defaulted_slots);
  r.ego_vehicle.position = canonicalize_or_throw(
      repo, "EV.position", read_key(ev, {"position"}), &out.defaulted_slots);
  r.ego_vehicle.global_behavior = canonicalize_or_throw(
      repo, "EV.global_behavior", read_key(ev, {"global_behavior", "behavior"}),
      &out.defaulted_slots);

  json participants = json::array();
  if (doc.contains("traffic_participants")) {
    const json& tp = doc.at("traffic_participants");
    if (tp.is_array()) participants = tp;
    else if (tp.is_object()) participants.push_back(tp);
  }
  int index = 0;
  for (const json& jp : participants) {
    if (!jp.is_object()) continue;
    const std::string suffix = "[" + std::to_string(index) + "]";
    rep::TrafficParticipant p;
    auto read_tp = [&](const char* slot_name, std::initializer_list<const char*> keys) {
      std::string value = read_key(jp, keys);
      std::vector<std::string> defaulted;
      std::string canon = canonicalize_or_throw(repo, slot_name, value, &defaulted);
      if (!defaulted.empty()) out.defaulted_slots.push_back(slot_name + suffix);
      return canon;
    };
    p.participant_type = read_tp("TP.type", {"participant_type", "type"});
    p.position_relation = read_tp("TP.position_relation", {"position_relation", "position"});
    p.longitudinal_oracle = read_tp("TP.longitudinal_oracle", {"longitudinal_oracle"});
    p.lateral_oracle = read_tp("TP.lateral_oracle", {"lateral_oracle"});
    p.global_behavior = read_tp("TP.global_behavior", {"global_behavior", "behavior"});
    if (jp.contains("count")) {
      if (jp.at("count").is_number()) p.count = jp.at("count").get<int>();
      else if (jp.at("count").is_string()) {
        try {
          p.count = std::stoi(jp.at("count").get<std::string>());
        } catch (...) {
          p.count = 1;
        }
      }
      if (p.count < 1) p.count = 1;
    }
    r.traffic_participants.push_back(std::move(p));
    ++index;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Self-consistency vote
// ---------------------------------------------------------------------------

namespace {

// Plurality with first-occurrence tie-break: among the values sharing the top
// tally, the winner is the one seen at the lowest candidate index.
std::string plurality(const std::vector<std::string>& values_by_candidate,
                      std::vector<std::pair<std::string, int>>* tally_out) {
  std::vector<std::pair<std::string, int>> tally;
  for (const std::string& v : values_by_candidate) {
    auto it = std::find_if(tally.begin(), tally.end(),
                           [&](const auto& e) { return e.first == v; });
    if (it == tally.end()) tally.emplace_back(v, 1);
    else ++it->second;
  }
  int best = 0;
  for (const auto& [v, c] : tally) best = std::max(best, c);
  std::string winner;
  for (const auto& [v, c] : tally) {  // tally is in first-occurrence order
    if (c == best) {
      winner = v;
      break;
    }
  }
  if (tally_out) *tally_out = tally;
  return winner;
}

std::vector<rep::TrafficParticipant> sorted_participants(
    const rep::ScenarioRepresentation& r) {
  std::vector<rep::TrafficParticipant> list = r.traffic_participants;
  std::stable_sort(list.begin(), list.end(),
                   [](const rep::TrafficParticipant& a, const rep::TrafficParticipant& b) {
                     if (a.participant_type != b.participant_type)
                       return a.participant_type < b.participant_type;
                     return a.position_relation < b.position_relation;
                   });
  return list;
}

}  // namespace

rep::ScenarioRepresentation self_consistency_vote(
    const std::vector<rep::ScenarioRepresentation>& candidates,
    std::vector<SlotTally>* tallies) {
  if (candidates.empty()) {
    throw ConfigError("self_consistency_vote: no candidates");
  }
  if (tallies) tallies->clear();

  auto record = [&](const std::string& slot,
                    const std::vector<std::pair<std::string, int>>& tally,
                    const std::string& winner) {
    if (tallies) tallies->push_back({slot, tally, winner});
  };

  rep::ScenarioRepresentation out;
  out.source_text = candidates.front().source_text;

  // Non-participant slots.
  for (const std::string& slot : rep::slot_names()) {
    if (rep::is_participant_slot(slot)) continue;
    std::vector<std::string> values;
    values.reserve(candidates.size());
    for (const auto& c : candidates) values.push_back(rep::get_slot(c, slot));
    std::vector<std::pair<std::string, int>> tally;
    std::string winner = plurality(values, &tally);
    rep::set_slot(out, slot, winner);
    record(slot, tally, winner);
  }

  // Participant list length is voted first, then each aligned index.
  std::vector<std::string> lens;
  for (const auto& c : candidates)
    lens.push_back(std::to_string(c.traffic_participants.size()));
  std::vector<std::pair<std::string, int>> len_tally;
  const size_t winner_len = static_cast<size_t>(std::stoul(plurality(lens, &len_tally)));
  record("TP.count_of_participants", len_tally, std::to_string(winner_len));

  std::vector<std::vector<rep::TrafficParticipant>> aligned;
  aligned.reserve(candidates.size());
  for (const auto& c : candidates) aligned.push_back(sorted_participants(c));

  static const std::vector<std::string> kTpSlots = {
      "TP.type", "TP.position_relation", "TP.longitudinal_oracle",
      "TP.lateral_oracle", "TP.global_behavior"};
  for (size_t j = 0; j < winner_len; ++j) {
    rep::TrafficParticipant merged;
    const std::string suffix = "[" + std::to_string(j) + "]";
    for (const std::string& slot : kTpSlots) {
      std::vector<std::string> values;
      for (const auto& list : aligned) {
        if (j < list.size()) values.push_back(rep::get_participant_slot(list[j], slot));
      }
      std::vector<std::pair<std::string, int>> tally;
      std::string winner = plurality(values, &tally);
      rep::set_participant_slot(merged, slot, winner);
      record(slot + suffix, tally, winner);
    }
    std::vector<std::string> counts;
    for (const auto& list : aligned) {
      if (j < list.size()) counts.push_back(std::to_string(list[j].count));
    }
    std::vector<std::pair<std::string, int>> count_tally;
    std::string count_winner = plurality(counts, &count_tally);
    merged.count = std::stoi(count_winner);
    record("TP.count" + suffix, count_tally, count_winner);
    out.traffic_participants.push_back(std::move(merged));
  }
  return out;
}

// ---------------------------------------------------------------------------
// parse
// ---------------------------------------------------------------------------

const StageRecord* ParseTrace::record_for(Stage s) const {
  for (const StageRecord& r : records) {
    if (r.stage == s) return &r;
  }
  return nullptr;
}

std::string ParseTrace::to_json(bool include_timings) const {
  ordered_json j;
  j["text"] = text;
  j["stages"] = ordered_json::array();
  for (const StageRecord& r : records) {
    ordered_json jr;
    jr["stage"] = stage_str(r.stage);
    jr["prompt"] = r.prompt;
    jr["response"] = r.response;
    jr["notes"] = r.notes;
    if (include_timings) jr["elapsed_ms"] = r.elapsed_ms;
    j["stages"].push_back(std::move(jr));
  }
  j["tallies"] = ordered_json::array();
  for (const SlotTally& t : tallies) {
    ordered_json jt;
    jt["slot"] = t.slot_name;
    ordered_json votes = ordered_json::array();
    for (const auto& [v, c] : t.votes) votes.push_back(ordered_json{{"value", v}, {"count", c}});
    jt["votes"] = std::move(votes);
    jt["winner"] = t.winner;
    j["tallies"].push_back(std::move(jt));
  }
  j["success"] = success;
  if (result) j["result"] = ordered_json::parse(rep::serialize(*result));
  j["findings"] = ordered_json::array();
  for (const auto& f : findings) {
    j["findings"].push_back(ordered_json{
        {"rule_id", f.rule_id},
        {"severity", f.severity == rep::Severity::Contradiction ? "Contradiction"
                                                                : "Warning"},
        {"message", f.message},
        {"slots", f.slots_involved}});
  }
  return j.dump(2) + "\n";
}

std::pair<rep::ScenarioRepresentation, ParseTrace> parse(
    const std::string& text, const PipelineConfig& config, ModelBackend& backend,
    const repo::RepositoryConfig& repo, const rep::RuleSet& rules) {
  if (util::trim(text).empty()) throw ConfigError("parse: text must be non-empty");
  config.check();

  using clock = std::chrono::steady_clock;
  ParseTrace trace;
  trace.text = text;
  for (Stage s : config.stages) {
    StageRecord r;
    r.stage = s;
    if (s == Stage::BP || s == Stage::FS || s == Stage::CoT) {
      r.prompt = build_prompt(s, text, config, repo);
    }
    trace.records.push_back(std::move(r));
  }
  auto record_of = [&trace](Stage s) -> StageRecord& {
    for (StageRecord& r : trace.records) {
      if (r.stage == s) return r;
    }
    throw ConfigError("parse: missing trace record");
  };

  const Stage composed = highest_composed_stage(config);
  const bool with_sac = config.has_stage(Stage::SAC);
  const bool with_sc = config.has_stage(Stage::SC);
  const int paths = with_sc ? config.sc_paths : 1;
  const double temperature =
      with_sc ? config.sc_temperature : config.single_path_temperature;

  std::vector<rep::ScenarioRepresentation> candidates;
  candidates.reserve(static_cast<size_t>(paths));
  const std::string composed_prompt = build_prompt(composed, text, config, repo);

  for (int path = 0; path < paths; ++path) {
    CompletionRequest req;
    req.prompt = composed_prompt;
    req.temperature = temperature;
    req.seed = static_cast<std::uint64_t>(path);
    req.fingerprint = make_fingerprint(stage_tag(composed), text);
    req.call_index = path;

    auto t0 = clock::now();
    std::string raw;
    try {
      raw = backend.complete(req);
    } catch (const BackendError&) {
      throw;
    }
    StageRecord& composed_record = record_of(composed);
    composed_record.elapsed_ms +=
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    if (path == 0) composed_record.response = raw;

    ExtractionResult extracted;
    try {
      extracted = extract_representation(raw, repo);
    } catch (const ExtractionError& e) {
      throw ExtractionError("stage " + std::string(stage_str(composed)) + ": " + e.what());
    }
    if (path == 0) {
      for (const std::string& slot : extracted.defaulted_slots) {
        composed_record.notes.push_back("slot " + slot + " defaulted to none");
      }
    }
    rep::ScenarioRepresentation candidate = extracted.representation;

    if (with_sac) {
      const std::string sac_prompt = build_prompt(Stage::SAC, text, config, repo, candidate);
      CompletionRequest sac_req;
      sac_req.prompt = sac_prompt;
      sac_req.temperature = temperature;
      sac_req.seed = static_cast<std::uint64_t>(path);
      sac_req.fingerprint = make_fingerprint(stage_tag(Stage::SAC), text);
      sac_req.call_index = path;

      auto t1 = clock::now();
      std::string sac_raw = backend.complete(sac_req);
      StageRecord& sac_record = record_of(Stage::SAC);
      sac_record.elapsed_ms +=
          std::chrono::duration<double, std::milli>(clock::now() - t1).count();
      if (path == 0) {
        sac_record.prompt = sac_prompt;
        sac_record.response = sac_raw;
      }
      try {
        candidate = extract_representation(sac_raw, repo).representation;
      } catch (const ExtractionError& e) {
        throw ExtractionError("stage SAC: " + std::string(e.what()));
      }
    }
    candidate.source_text = text;
    candidates.push_back(std::move(candidate));
  }

  rep::ScenarioRepresentation final_rep;
  if (with_sc) {
    auto t2 = clock::now();
    final_rep = self_consistency_vote(candidates, &trace.tallies);
    StageRecord& sc_record = record_of(Stage::SC);
    sc_record.elapsed_ms =
        std::chrono::duration<double, std::milli>(clock::now() - t2).count();
    sc_record.notes.push_back("paths=" + std::to_string(paths));
  } else {
    final_rep = candidates.front();
  }
  final_rep.source_text = text;

  trace.findings = rep::validate(final_rep, repo, rules);
  if (rep::has_contradiction(trace.findings)) {
    trace.success = false;
    std::string ids;
    for (const auto& f : trace.findings) {
      if (f.severity == rep::Severity::Contradiction) {
        if (!ids.empty()) ids += ", ";
        ids += f.rule_id;
      }
    }
    auto shared_trace = std::make_shared<ParseTrace>(trace);
    throw ParseFailure("parsed representation carries contradictions: " + ids,
                       trace.findings, shared_trace);
  }
  trace.success = true;
  trace.result = final_rep;
  return {final_rep, trace};
}

}  // namespace scenforge::pipeline
