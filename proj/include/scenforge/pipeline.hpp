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

#ifndef SCENFORGE_PIPELINE_HPP
#define SCENFORGE_PIPELINE_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scenforge/backend.hpp"
#include "scenforge/errors.hpp"
#include "scenforge/representation.hpp"
#include "scenforge/repository.hpp"

namespace scenforge::pipeline {

// The five prompt stages. Configurations are prefixes of this order; BP is
// always present.
enum class Stage { BP, FS, CoT, SAC, SC };

const char* stage_str(Stage s);           // "BP", "FS", ...
std::string stage_tag(Stage s);           // lowercase fingerprint tag
std::optional<Stage> stage_from_str(const std::string& s);

struct FewShotExample {
  std::string text;
  rep::ScenarioRepresentation representation;
};

struct PipelineConfig {
  std::vector<Stage> stages = {Stage::BP, Stage::FS, Stage::CoT, Stage::SAC, Stage::SC};
  int sc_paths = 10;
  std::vector<FewShotExample> few_shot_examples;
  std::string role_prompt;
  double single_path_temperature = 0.2;
  double sc_temperature = 0.8;

  // Bundled defaults: full stage chain, role prompt, two worked examples.
  static PipelineConfig defaults();
  // "BP", "BP-FS", "BP-FS-CoT", "BP-FS-CoT-SAC" or "full".
  static PipelineConfig from_ablation(const std::string& token);
  static PipelineConfig from_file(const std::string& path);

  bool has_stage(Stage s) const;
  // Throws ConfigError unless stages form a legal prefix and sc_paths is
  // consistent (>= 1 overall, >= 3 when SC is enabled).
  void check() const;
};

struct StageRecord {
  Stage stage;
  std::string prompt;    // full prompt text for this stage's scaffold
  std::string response;  // raw completion, when this stage issued the call
  double elapsed_ms = 0.0;
  std::vector<std::string> notes;
};

struct SlotTally {
  std::string slot_name;  // participant slots carry an "[index]" suffix
  std::vector<std::pair<std::string, int>> votes;
  std::string winner;
};

struct ParseTrace {
  std::string text;
  std::vector<StageRecord> records;  // exactly one per executed stage
  std::vector<SlotTally> tallies;    // populated when SC is active
  bool success = false;
  std::optional<rep::ScenarioRepresentation> result;
  std::vector<rep::ConsistencyFinding> findings;

  const StageRecord* record_for(Stage s) const;
  // Timings are excluded by default so scripted runs serialize to identical
  // bytes; pass true for profiling output.
  std::string to_json(bool include_timings = false) const;
};

// Parse failure carrying contradiction findings and the trace for reporting.
class ParseFailure : public Error {
public:
  ParseFailure(const std::string& msg, std::vector<rep::ConsistencyFinding> findings,
               std::shared_ptr<ParseTrace> trace)
      : Error(msg), findings_(std::move(findings)), trace_(std::move(trace)) {}
  const std::vector<rep::ConsistencyFinding>& findings() const { return findings_; }
  const ParseTrace* trace() const { return trace_.get(); }

private:
  std::vector<rep::ConsistencyFinding> findings_;
  std::shared_ptr<ParseTrace> trace_;
};

// Prompt for one stage scaffold: role prompt + repository dictionary +
// stage-specific material + target text. BP/FS/CoT scaffolds are cumulative
// (a CoT prompt carries the few-shot examples). SAC embeds the prior draft
// and is the only stage that takes one. Byte-stable for fixed inputs.
std::string build_prompt(Stage stage, const std::string& text,
                         const PipelineConfig& config,
                         const repo::RepositoryConfig& repo,
                         const std::optional<rep::ScenarioRepresentation>& prior = {});

struct ExtractionResult {
  rep::ScenarioRepresentation representation;
  std::vector<std::string> defaulted_slots;  // filled with "none"
};

// Locates the outermost JSON object in a raw model response (fenced block
// preferred), parses it leniently and canonicalizes every slot against the
// repository. Novel values are retained where the slot allows them.
ExtractionResult extract_representation(const std::string& raw,
                                        const repo::RepositoryConfig& repo);

// Per-slot plurality vote. Participant lists are aligned by sorting each
// candidate's list by (type, position_relation); the winning participant
// count is itself voted first. Ties resolve to the value whose first
// occurrence has the lowest candidate index.
rep::ScenarioRepresentation self_consistency_vote(
    const std::vector<rep::ScenarioRepresentation>& candidates,
    std::vector<SlotTally>* tallies = nullptr);

// Runs the configured stage chain: one completion for the BP/FS/CoT prefix,
// a second for SAC (which consumes the draft), the whole chain repeated
// sc_paths times under SC with a per-slot vote. The final representation must
// validate free of contradictions or ParseFailure is thrown.
std::pair<rep::ScenarioRepresentation, ParseTrace> parse(
    const std::string& text, const PipelineConfig& config, ModelBackend& backend,
    const repo::RepositoryConfig& repo, const rep::RuleSet& rules);

}  // namespace scenforge::pipeline

#endif  // SCENFORGE_PIPELINE_HPP
