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

#include <doctest.h>

#include <cstdlib>
#include <json.hpp>
#include <thread>

#include <httplib.h>

#include "helpers.hpp"
#include "scenforge/errors.hpp"
#include "scenforge/pipeline.hpp"
#include "scenforge/util.hpp"

using namespace scenforge;
using namespace scenforge::pipeline;
using testhelpers::bundled_repo;
using testhelpers::bundled_rules;
using testhelpers::left_turn_rep;

namespace {

const char* kLeftTurnText = "Unprotected left turn for traffic vehicle";

std::string fenced(const rep::ScenarioRepresentation& r) {
  return "Here is the scenario representation:\n```json\n" + rep::serialize(r) +
         "```\nDone.";
}

ScriptedBackend golden_backend(const PipelineConfig& config) {
  ScriptedBackend backend;
  const rep::ScenarioRepresentation golden = left_turn_rep();
  const Stage composed = config.has_stage(Stage::CoT)  ? Stage::CoT
                          : config.has_stage(Stage::FS) ? Stage::FS
                                                        : Stage::BP;
  backend.add_text_responses(stage_tag(composed), kLeftTurnText, {fenced(golden)});
  backend.add_text_responses("sac", kLeftTurnText, {fenced(golden)});
  return backend;
}

}  // namespace

TEST_CASE("pipeline config: prefix legality and sc_paths bounds") {
  PipelineConfig config = PipelineConfig::defaults();
  CHECK_NOTHROW(config.check());

  PipelineConfig bad = config;
  bad.stages = {Stage::BP, Stage::CoT};  // skips FS
  CHECK_THROWS_AS(bad.check(), ConfigError);

  PipelineConfig low_paths = config;
  low_paths.sc_paths = 2;
  CHECK_THROWS_AS(low_paths.check(), ConfigError);

  PipelineConfig no_sc = PipelineConfig::from_ablation("BP-FS");
  no_sc.sc_paths = 1;
  CHECK_NOTHROW(no_sc.check());

  CHECK(PipelineConfig::from_ablation("full").stages.size() == 5);
  CHECK(PipelineConfig::from_ablation("BP").stages.size() == 1);
  CHECK(PipelineConfig::from_ablation("BP-FS-CoT").stages.size() == 3);
  CHECK_THROWS_AS(PipelineConfig::from_ablation("BP-SAC"), ConfigError);
}

TEST_CASE("build_prompt composes role, dictionary, scaffold and text") {
  PipelineConfig config = PipelineConfig::defaults();
  const std::string fs = build_prompt(Stage::FS, "target text here", config, bundled_repo());
  CHECK(fs.find(config.role_prompt) == 0);
  CHECK(fs.find("RT.topology") != std::string::npos);  // dictionary injected
  CHECK(fs.find("Input 1:") != std::string::npos);
  CHECK(fs.find("Input 2:") != std::string::npos);
  CHECK(fs.find("target text here") != std::string::npos);
  // examples precede the target
  CHECK(fs.rfind("target text here") > fs.find("Input 2:"));

  // degenerate empty text still yields a well-formed prompt
  const std::string empty = build_prompt(Stage::BP, "", config, bundled_repo());
  CHECK(empty.find("Testing scenario text:") != std::string::npos);

  // determinism
  CHECK(build_prompt(Stage::CoT, "x", config, bundled_repo()) ==
        build_prompt(Stage::CoT, "x", config, bundled_repo()));

  // CoT builds on FS
  const std::string cot = build_prompt(Stage::CoT, "x", config, bundled_repo());
  CHECK(cot.find("Input 1:") != std::string::npos);
  CHECK(cot.find("step by step") != std::string::npos);

  // SAC requires and embeds the draft
  CHECK_THROWS_AS(build_prompt(Stage::SAC, "x", config, bundled_repo()), ConfigError);
  const std::string sac =
      build_prompt(Stage::SAC, "x", config, bundled_repo(), left_turn_rep());
  CHECK(sac.find("Knowledge validation") != std::string::npos);
  CHECK(sac.find("\"turn_left\"") != std::string::npos);

  PipelineConfig bp_only = PipelineConfig::from_ablation("BP");
  CHECK_THROWS_AS(build_prompt(Stage::FS, "x", bp_only, bundled_repo()), ConfigError);
}

TEST_CASE("extract_representation: fenced JSON, synonyms, defaults") {
  const std::string raw =
      "Analysis shows a 'T' intersection.\n"
      "```json\n"
      "{\"road_topology\": {\"topology\": \"T-junction\", \"lanes\": \"two lanes\"},\n"
      " \"ego_vehicle\": {\"vehicle_type\": \"car\", \"global_behavior\": \"straight forward\"}}\n"
      "```";
  auto result = extract_representation(raw, bundled_repo());
  CHECK(result.representation.road_topology.topology == "t_junction");
  CHECK(result.representation.road_topology.lanes == "two_lanes");
  CHECK(result.representation.ego_vehicle.global_behavior == "go_forward");
  // everything absent defaulted to the sentinel and flagged
  CHECK(result.representation.climate.weather_type == "none");
  CHECK(std::find(result.defaulted_slots.begin(), result.defaulted_slots.end(),
                  "C.type") != result.defaulted_slots.end());
}

TEST_CASE("extract_representation: bare object, no fences") {
  const std::string raw = "prefix {\"climate\": {\"weather_type\": \"rain\"}} suffix";
  auto result = extract_representation(raw, bundled_repo());
  CHECK(result.representation.climate.weather_type == "rainy");
}

TEST_CASE("extract_representation errors") {
  CHECK_THROWS_AS(extract_representation("no json here", bundled_repo()),
                  ExtractionError);
  CHECK_THROWS_AS(extract_representation("{\"road_topology\": {\"topology\": \"hoverlane\"}}",
                                         bundled_repo()),
                  RejectedElementError);
  // novel value in an open slot is retained
  auto result = extract_representation(
      "{\"temporary_changes\": {\"change_type\": \"hovering drone\"}}", bundled_repo());
  CHECK(result.representation.temporary_changes.change_type == "hovering drone");
}

TEST_CASE("self-consistency vote: plurality and tie-break") {
  rep::ScenarioRepresentation base = left_turn_rep();
  std::vector<rep::ScenarioRepresentation> candidates;
  for (int i = 0; i < 10; ++i) candidates.push_back(base);
  for (int i = 6; i < 10; ++i) candidates[static_cast<size_t>(i)].road_topology.topology = "t_junction";

  auto winner = self_consistency_vote(candidates);
  CHECK(winner.road_topology.topology == "intersection");  // 6 vs 4

  SUBCASE("unanimity returns the candidate") {
    std::vector<rep::ScenarioRepresentation> same(5, base);
    CHECK(self_consistency_vote(same) == base);
  }

  SUBCASE("2+2+1 tie resolves to the earliest candidate index") {
    std::vector<rep::ScenarioRepresentation> five(5, base);
    five[0].climate.weather_type = "rainy";
    five[1].climate.weather_type = "snowy";
    five[2].climate.weather_type = "rainy";
    five[3].climate.weather_type = "snowy";
    five[4].climate.weather_type = "foggy";
    // rainy and snowy tie at 2; rainy first seen at index 0
    auto w = self_consistency_vote(five);
    CHECK(w.climate.weather_type == "rainy");
  }

  SUBCASE("no-tie votes are permutation invariant") {
    std::vector<rep::ScenarioRepresentation> set = candidates;  // 6 vs 4
    util::RandomStream rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      rng.shuffle(set);
      CHECK(self_consistency_vote(set).road_topology.topology == "intersection");
    }
  }

  SUBCASE("participant lists align by (type, position) before voting") {
    rep::ScenarioRepresentation a = base;
    rep::TrafficParticipant extra;
    extra.participant_type = "truck";
    extra.position_relation = "front";
    a.traffic_participants.push_back(extra);  // [car/opposite, truck/front]
    rep::ScenarioRepresentation b = base;
    b.traffic_participants.insert(b.traffic_participants.begin(), extra);
    // same multiset, different order
    auto w = self_consistency_vote({a, b, a});
    REQUIRE(w.traffic_participants.size() == 2);
    CHECK(w.traffic_participants[0].participant_type == "car");
    CHECK(w.traffic_participants[1].participant_type == "truck");
  }
}

TEST_CASE("scripted parse: golden left turn end to end") {
  PipelineConfig config = PipelineConfig::defaults();
  ScriptedBackend backend = golden_backend(config);
  auto [result, trace] =
      parse(kLeftTurnText, config, backend, bundled_repo(), bundled_rules());
  REQUIRE(result.traffic_participants.size() == 1);
  CHECK(result.traffic_participants[0].longitudinal_oracle == "yield");
  CHECK(result.source_text == kLeftTurnText);
  CHECK(trace.success);
  // one record per configured stage
  REQUIRE(trace.records.size() == config.stages.size());
  for (size_t i = 0; i < config.stages.size(); ++i) {
    CHECK(trace.records[i].stage == config.stages[i]);
  }
  CHECK_FALSE(trace.tallies.empty());
}

TEST_CASE("scripted parse is deterministic end to end") {
  PipelineConfig config = PipelineConfig::defaults();
  ScriptedBackend backend1 = golden_backend(config);
  ScriptedBackend backend2 = golden_backend(config);
  auto [r1, t1] = parse(kLeftTurnText, config, backend1, bundled_repo(), bundled_rules());
  auto [r2, t2] = parse(kLeftTurnText, config, backend2, bundled_repo(), bundled_rules());
  CHECK(r1 == r2);
  CHECK(t1.to_json() == t2.to_json());
}

TEST_CASE("sc_paths=1 equals the non-SC result on the same table") {
  // SC over a singleton vote must reproduce the single-path outcome.
  PipelineConfig sc = PipelineConfig::defaults();
  sc.sc_paths = 3;  // minimum legal; all paths hit the same scripted entry
  PipelineConfig no_sc = PipelineConfig::from_ablation("BP-FS-CoT-SAC");
  ScriptedBackend b1 = golden_backend(sc);
  ScriptedBackend b2 = golden_backend(no_sc);
  auto [r1, t1] = parse(kLeftTurnText, sc, b1, bundled_repo(), bundled_rules());
  auto [r2, t2] = parse(kLeftTurnText, no_sc, b2, bundled_repo(), bundled_rules());
  CHECK(r1 == r2);
}

TEST_CASE("contradictory scripted output raises ParseFailure with findings") {
  rep::ScenarioRepresentation bad = left_turn_rep();
  bad.transportation_facilities.road_marker = "broken_line";  // R1 with intersection
  PipelineConfig config = PipelineConfig::from_ablation("BP");
  ScriptedBackend backend;
  backend.add_text_responses("bp", "broken scenario", {fenced(bad)});
  try {
    parse("broken scenario", config, backend, bundled_repo(), bundled_rules());
    FAIL("expected ParseFailure");
  } catch (const ParseFailure& e) {
    REQUIRE_FALSE(e.findings().empty());
    CHECK(e.findings()[0].rule_id == "R1");
    REQUIRE(e.trace() != nullptr);
    CHECK_FALSE(e.trace()->success);
  }
}

TEST_CASE("missing scripted entry raises BackendError") {
  PipelineConfig config = PipelineConfig::from_ablation("BP");
  ScriptedBackend backend;
  CHECK_THROWS_AS(
      parse("text without a table entry", config, backend, bundled_repo(), bundled_rules()),
      BackendError);
}

TEST_CASE("ablation prefixes produce traces with exactly the configured stages") {
  for (const char* token : {"BP", "BP-FS", "BP-FS-CoT", "BP-FS-CoT-SAC", "full"}) {
    PipelineConfig config = PipelineConfig::from_ablation(token);
    ScriptedBackend backend = golden_backend(config);
    auto [result, trace] =
        parse(kLeftTurnText, config, backend, bundled_repo(), bundled_rules());
    REQUIRE(trace.records.size() == config.stages.size());
    for (size_t i = 0; i < config.stages.size(); ++i) {
      CHECK(trace.records[i].stage == config.stages[i]);
    }
    CHECK(result.traffic_participants.size() == 1);
  }
}

TEST_CASE("remote backend speaks the chat-completion wire format") {
  httplib::Server server;
  nlohmann::json seen_body;
  std::string seen_auth;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                seen_body = nlohmann::json::parse(req.body);
                if (req.has_header("Authorization")) {
                  seen_auth = req.get_header_value("Authorization");
                }
                nlohmann::json reply = {
                    {"choices",
                     {{{"message", {{"role", "assistant"}, {"content", "{\"ok\":1}"}}}}}}};
                res.set_content(reply.dump(), "application/json");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("SCENFORGE_TEST_KEY", "sk-test-123", 1);
  RemoteBackendConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port);
  config.model = "test-model";
  config.api_key_env = "SCENFORGE_TEST_KEY";
  RemoteBackend backend(config);

  CompletionRequest req;
  req.prompt = "hello";
  req.temperature = 0.4;
  req.seed = 7;
  const std::string content = backend.complete(req);
  CHECK(content == "{\"ok\":1}");
  CHECK(seen_body.at("model") == "test-model");
  CHECK(seen_body.at("temperature").get<double>() == doctest::Approx(0.4));
  CHECK(seen_body.at("seed").get<int>() == 7);
  REQUIRE(seen_body.at("messages").is_array());
  CHECK(seen_body.at("messages").at(0).at("role") == "user");
  CHECK(seen_body.at("messages").at(0).at("content") == "hello");
  CHECK(seen_auth == "Bearer sk-test-123");

  server.stop();
  worker.join();
}

TEST_CASE("remote backend without API key is a ConfigError") {
  unsetenv("SCENFORGE_MISSING_KEY");
  RemoteBackendConfig config;
  config.api_key_env = "SCENFORGE_MISSING_KEY";
  CHECK_THROWS_AS(RemoteBackend{config}, ConfigError);
}

TEST_CASE("scripted tables load from both key forms") {
  const std::string table = R"({
    "fingerprints": {")" + make_fingerprint("bp", "via hash") + R"(": ["resp-hash"]},
    "texts": {"via text": {"bp": ["resp-text-0", "resp-text-1"]}}
  })";
  ScriptedBackend backend = ScriptedBackend::from_json_text(table);

  CompletionRequest req;
  req.fingerprint = make_fingerprint("bp", "via hash");
  CHECK(backend.complete(req) == "resp-hash");

  req.fingerprint = make_fingerprint("bp", "via text");
  req.call_index = 0;
  CHECK(backend.complete(req) == "resp-text-0");
  req.call_index = 1;
  CHECK(backend.complete(req) == "resp-text-1");
  req.call_index = 2;  // wraps
  CHECK(backend.complete(req) == "resp-text-0");
}
