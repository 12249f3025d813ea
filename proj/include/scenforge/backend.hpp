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

#ifndef SCENFORGE_BACKEND_HPP
#define SCENFORGE_BACKEND_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scenforge::pipeline {

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.2;
  std::optional<std::uint64_t> seed;
  // Routing metadata the pipeline attaches for deterministic test backends.
  // Remote backends ignore these.
  std::string fingerprint;  // "<stage>:<hash of description text>"
  int call_index = 0;       // self-consistency path index
};

class ModelBackend {
public:
  virtual ~ModelBackend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;

  std::string complete(const std::string& prompt, double temperature,
                       std::optional<std::uint64_t> seed = std::nullopt) {
    CompletionRequest req;
    req.prompt = prompt;
    req.temperature = temperature;
    req.seed = seed;
    return complete(req);
  }

  // Declared when a backend cannot take concurrent complete() calls.
  virtual bool requires_serialized_calls() const { return false; }
};

// "<stage>:<fnv1a64 hex of trimmed text>"; the key format of scripted tables.
std::string make_fingerprint(const std::string& stage_tag, const std::string& text);

// Deterministic response table. A table file is a JSON object with either or
// both of:
//   "fingerprints": { "<stage>:<hash>": ["response", ...], ... }
//   "texts": { "<description text>": { "<stage>": ["response", ...] }, ... }
// The "texts" form is hashed into fingerprints at load so tables can be
// authored by hand. Responses are indexed by call_index modulo list size.
class ScriptedBackend : public ModelBackend {
public:
  static ScriptedBackend from_file(const std::string& path);
  static ScriptedBackend from_json_text(const std::string& text);
  ScriptedBackend() = default;

  void add_response(const std::string& fingerprint, const std::string& response);
  void add_text_responses(const std::string& stage_tag, const std::string& text,
                          const std::vector<std::string>& responses);

  std::string complete(const CompletionRequest& request) override;

  size_t entry_count() const { return table_.size(); }

private:
  std::map<std::string, std::vector<std::string>> table_;
};

struct RemoteBackendConfig {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4";
  std::string api_key_env = "SCENFORGE_API_KEY";
  int timeout_seconds = 120;
};

// Chat-completion wire format over HTTP(S): POST {model, messages,
// temperature[, seed]}, reads choices[0].message.content. The API key is read
// from the configured environment variable at construction.
class RemoteBackend : public ModelBackend {
public:
  explicit RemoteBackend(RemoteBackendConfig config);

  std::string complete(const CompletionRequest& request) override;

private:
  RemoteBackendConfig config_;
  std::string api_key_;
};

}  // namespace scenforge::pipeline

#endif  // SCENFORGE_BACKEND_HPP
