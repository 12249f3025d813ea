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

#include "scenforge/backend.hpp"

#include <cstdlib>
#include <json.hpp>

#include <httplib.h>

#include "scenforge/errors.hpp"
#include "scenforge/util.hpp"

namespace scenforge::pipeline {

using nlohmann::json;

std::string make_fingerprint(const std::string& stage_tag, const std::string& text) {
  return stage_tag + ":" + util::fnv1a64_hex(util::trim(text));
}

ScriptedBackend ScriptedBackend::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scripted table: ") + e.what());
  }
  ScriptedBackend backend;
  try {
    if (doc.contains("fingerprints")) {
      for (const auto& [key, responses] : doc.at("fingerprints").items()) {
        for (const auto& r : responses) {
          backend.add_response(key, r.get<std::string>());
        }
      }
    }
    if (doc.contains("texts")) {
      for (const auto& [text_key, stages] : doc.at("texts").items()) {
        for (const auto& [stage, responses] : stages.items()) {
          std::vector<std::string> list;
          for (const auto& r : responses) list.push_back(r.get<std::string>());
          backend.add_text_responses(stage, text_key, list);
        }
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scripted table: ") + e.what());
  }
  return backend;
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
  return from_json_text(util::read_file(path));
}

void ScriptedBackend::add_response(const std::string& fingerprint,
                                   const std::string& response) {
  table_[fingerprint].push_back(response);
}

void ScriptedBackend::add_text_responses(const std::string& stage_tag,
                                         const std::string& text,
                                         const std::vector<std::string>& responses) {
  auto& list = table_[make_fingerprint(stage_tag, text)];
  list.insert(list.end(), responses.begin(), responses.end());
}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  auto it = table_.find(request.fingerprint);
  if (it == table_.end() || it->second.empty()) {
    throw BackendError("scripted table has no responses for fingerprint '" +
                       request.fingerprint + "'");
  }
  const auto& responses = it->second;
  size_t index = static_cast<size_t>(request.call_index) % responses.size();
  return responses[index];
}

RemoteBackend::RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key) {
    throw ConfigError("remote backend: environment variable " + config_.api_key_env +
                      " is not set");
  }
  api_key_ = key;
}

std::string RemoteBackend::complete(const CompletionRequest& request) {
  json body;
  body["model"] = config_.model;
  body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  if (request.seed) body["seed"] = *request.seed;

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
  auto res = client.Post(config_.path, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendError("remote backend: transport failure talking to " +
                       config_.base_url + " (" + httplib::to_string(res.error()) + ")");
  }
  if (res->status != 200) {
    throw BackendError("remote backend: HTTP " + std::to_string(res->status) + ": " +
                       res->body.substr(0, 500));
  }
  try {
    json doc = json::parse(res->body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("remote backend: malformed response: ") + e.what());
  }
}

}  // namespace scenforge::pipeline
