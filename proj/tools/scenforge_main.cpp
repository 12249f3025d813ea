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

#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "scenforge/assembler.hpp"
#include "scenforge/corpus.hpp"
#include "scenforge/errors.hpp"
#include "scenforge/executor.hpp"
#include "scenforge/metrics.hpp"
#include "scenforge/pipeline.hpp"
#include "scenforge/repository.hpp"
#include "scenforge/util.hpp"
#include "scenforge/xosc.hpp"

namespace fs = std::filesystem;
using namespace scenforge;
using ordered_json = nlohmann::ordered_json;

namespace {

// Exit codes are part of the operator contract; see README for the table.
enum ExitCode {
  kOk = 0,
  kUnexpected = 1,
  kParseFailure = 2,
  kAssemblyError = 3,
  kEmitError = 4,
  kConfigError = 5,
  kReadError = 6,
  kMapMismatch = 7,
};

void print_error(const std::string& klass, const std::string& message) {
  ordered_json j;
  j["error"] = klass;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

int classify_and_report(const std::exception& e) {
  if (const auto* err = dynamic_cast<const pipeline::ParseFailure*>(&e)) {
    print_error("ParseFailure", err->what());
    return kParseFailure;
  }
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const BackendError*>(&e)) {
    print_error("ConfigError", e.what());
    return kConfigError;
  }
  if (dynamic_cast<const MapMismatchError*>(&e)) {
    print_error("MapMismatchError", e.what());
    return kMapMismatch;
  }
  if (dynamic_cast<const EmitError*>(&e)) {
    print_error("EmitError", e.what());
    return kEmitError;
  }
  if (dynamic_cast<const NoMatchingMapError*>(&e) || dynamic_cast<const NoRouteError*>(&e) ||
      dynamic_cast<const UnknownBehaviorError*>(&e) ||
      dynamic_cast<const NoAdjacentLaneError*>(&e) || dynamic_cast<const OffMapError*>(&e) ||
      dynamic_cast<const InvalidDecompositionError*>(&e)) {
    print_error("AssemblyError", e.what());
    return kAssemblyError;
  }
  if (dynamic_cast<const ReadError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const ExtractionError*>(&e) ||
      dynamic_cast<const RejectedElementError*>(&e)) {
    print_error("ReadError", e.what());
    return kReadError;
  }
  print_error("Error", e.what());
  return kUnexpected;
}

struct DataPaths {
  std::string data_dir;
  std::string repo_path;
  std::string corpus_dir;
  std::string rules_path;
  std::string decomposition_path;

  void resolve() {
    if (data_dir.empty()) {
      if (const char* env = std::getenv("SCENFORGE_DATA_DIR")) data_dir = env;
    }
    if (data_dir.empty()) data_dir = SCENFORGE_SOURCE_DATA_DIR;
    if (repo_path.empty()) repo_path = data_dir + "/repository.json";
    if (corpus_dir.empty()) corpus_dir = data_dir + "/corpus";
    if (rules_path.empty()) rules_path = data_dir + "/rules.json";
    if (decomposition_path.empty()) decomposition_path = data_dir + "/decomposition.json";
  }

  void add_options(CLI::App* cmd) {
    cmd->add_option("--data-dir", data_dir, "Base data directory");
    cmd->add_option("--repo", repo_path, "Repository config JSON");
    cmd->add_option("--corpus", corpus_dir, "Corpus directory");
    cmd->add_option("--rules", rules_path, "Consistency rule file");
    cmd->add_option("--decomposition", decomposition_path, "Decomposition table file");
  }
};

struct BackendOptions {
  std::string kind = "scripted";
  std::string table_path;
  std::string model = "gpt-4";
  std::string base_url = "https://api.openai.com";
  std::string api_key_env = "SCENFORGE_API_KEY";

  void add_options(CLI::App* cmd) {
    cmd->add_option("--backend", kind, "Model backend: scripted or remote")
        ->check(CLI::IsMember({"scripted", "remote"}));
    cmd->add_option("--scripted-table", table_path, "ScriptedBackend response table");
    cmd->add_option("--model", model, "Remote model name");
    cmd->add_option("--base-url", base_url, "Remote API base URL");
    cmd->add_option("--api-key-env", api_key_env, "Environment variable holding the key");
  }

  std::unique_ptr<pipeline::ModelBackend> make(const DataPaths& paths) const {
    if (kind == "scripted") {
      std::string path = table_path.empty()
                             ? paths.data_dir + "/demo/scripted_table.json"
                             : table_path;
      return std::make_unique<pipeline::ScriptedBackend>(
          pipeline::ScriptedBackend::from_file(path));
    }
    pipeline::RemoteBackendConfig config;
    config.base_url = base_url;
    config.model = model;
    config.api_key_env = api_key_env;
    return std::make_unique<pipeline::RemoteBackend>(config);
  }
};

std::string scenario_slug(const std::string& text, std::uint64_t seed) {
  std::string slug = util::normalize_token(text);
  if (slug.size() > 48) slug = slug.substr(0, 48);
  if (slug.empty()) slug = "scenario";
  return slug + "_s" + std::to_string(seed);
}

struct GenerateResult {
  rep::ScenarioRepresentation representation;
  pipeline::ParseTrace trace;
  doc::TargetDocument document;
  assembler::AssemblyReport report;
  std::string xosc_bytes;
};

GenerateResult generate_one(const std::string& text, const std::string& ablation,
                            int sc_paths, pipeline::ModelBackend& backend,
                            const repo::RepositoryConfig& repo_config,
                            const rep::RuleSet& rules, const corpus::DslCorpus& corpus,
                            const assembler::DecompositionTable& table,
                            std::uint64_t seed) {
  pipeline::PipelineConfig config = pipeline::PipelineConfig::from_ablation(ablation);
  if (sc_paths > 0) config.sc_paths = sc_paths;
  GenerateResult out;
  auto [representation, trace] =
      pipeline::parse(text, config, backend, repo_config, rules);
  out.representation = representation;
  out.trace = std::move(trace);
  assembler::AssemblyContext context{corpus, repo_config, rules, table};
  auto [document, report] = assembler::assemble(representation, context, seed);
  out.document = std::move(document);
  out.report = std::move(report);
  out.xosc_bytes = xosc::emit(out.document);
  return out;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

int cmd_generate(const std::string& text, const std::string& ablation, int sc_paths,
                 const BackendOptions& backend_opts, const DataPaths& paths,
                 const std::string& out_dir, std::uint64_t seed) {
  auto repo_config = repo::load_repository(paths.repo_path);
  auto rules = rep::RuleSet::from_file(paths.rules_path);
  auto corpus = corpus::DslCorpus::load(paths.corpus_dir);
  auto table = assembler::DecompositionTable::from_file(paths.decomposition_path);
  auto backend = backend_opts.make(paths);

  GenerateResult result;
  try {
    result = generate_one(text, ablation, sc_paths, *backend, repo_config, rules,
                          corpus, table, seed);
  } catch (const pipeline::ParseFailure& failure) {
    if (failure.trace()) {
      fs::create_directories(out_dir);
      util::write_file(out_dir + "/" + scenario_slug(text, seed) + ".trace.json",
                       failure.trace()->to_json());
    }
    throw;
  }

  fs::create_directories(out_dir);
  const std::string base = out_dir + "/" + scenario_slug(text, seed);
  util::write_file(base + ".rep.json", rep::serialize(result.representation));
  util::write_file(base + ".xosc", result.xosc_bytes);
  util::write_file(base + ".trace.json", result.trace.to_json());

  auto findings = xosc::verify(result.xosc_bytes);
  if (xosc::has_schema_errors(findings)) {
    throw EmitError("emitted document failed schema verification");
  }
  std::cout << base + ".rep.json\n" << base + ".xosc\n" << base + ".trace.json\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(const std::string& rep_path, const DataPaths& paths) {
  auto repo_config = repo::load_repository(paths.repo_path);
  auto rules = rep::RuleSet::from_file(paths.rules_path);
  auto representation = rep::deserialize(util::read_file(rep_path));
  auto findings = rep::validate(representation, repo_config, rules);
  ordered_json j = ordered_json::array();
  for (const auto& f : findings) {
    j.push_back(ordered_json{
        {"rule_id", f.rule_id},
        {"severity",
         f.severity == rep::Severity::Contradiction ? "Contradiction" : "Warning"},
        {"message", f.message},
        {"slots", f.slots_involved}});
  }
  std::cout << j.dump(2) << "\n";
  return rep::has_contradiction(findings) ? kParseFailure : kOk;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

int cmd_run(const std::string& xosc_path, const std::string& ego_kind,
            const std::string& trace_path, const std::string& out_path,
            double timeout_override, const DataPaths& paths) {
  auto corpus = corpus::DslCorpus::load(paths.corpus_dir);
  auto loaded = xosc::load(util::read_file(xosc_path));
  auto document = xosc::import_document(loaded, corpus);

  exec::MonitorSpec spec;
  if (timeout_override > 0) spec.timeout_limit = timeout_override;
  exec::EgoPolicy policy;
  if (ego_kind == "scripted") {
    if (trace_path.empty()) {
      throw ConfigError("--ego scripted requires --trace <file>");
    }
    policy = exec::ScriptedEgo::from_file(trace_path);
  } else {
    policy = exec::LaneFollowEgo{};
  }
  auto report = exec::run(document, corpus, spec, policy);
  const std::string out = out_path.empty() ? xosc_path + ".report.json" : out_path;
  util::write_file(out, report.to_json());
  std::cout << out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// batch
// ---------------------------------------------------------------------------

struct BatchCase {
  std::string text;
  std::string ground_truth_path;
};

struct BatchItem {
  size_t case_index = 0;
  std::uint64_t seed = 0;
  std::string status;  // executable | read_error | runtime_error
  std::string dir;
  std::string error;
  double mean_accuracy = -1.0;
};

int cmd_batch(const std::string& manifest_path, int workers, const DataPaths& paths_in) {
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(util::read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }

  DataPaths paths = paths_in;
  if (manifest.contains("data_dir")) paths.data_dir = manifest.at("data_dir");
  paths.resolve();

  std::vector<BatchCase> cases;
  if (manifest.contains("texts")) {
    for (const auto& t : manifest.at("texts")) cases.push_back({t.get<std::string>(), ""});
  }
  if (manifest.contains("cases")) {
    for (const auto& c : manifest.at("cases")) {
      cases.push_back({c.at("text").get<std::string>(), c.value("ground_truth", "")});
    }
  }
  if (manifest.contains("text_files")) {
    for (const auto& f : manifest.at("text_files")) {
      cases.push_back({util::trim(util::read_file(f.get<std::string>())), ""});
    }
  }
  if (cases.empty()) throw ConfigError("manifest: no texts");

  std::vector<std::uint64_t> seeds;
  for (const auto& s : manifest.at("seeds")) seeds.push_back(s.get<std::uint64_t>());
  if (seeds.empty()) throw ConfigError("manifest: seeds must be non-empty");

  const std::string out_dir = manifest.at("out").get<std::string>();
  const std::string ablation = manifest.value("ablation", "full");
  const int sc_paths = manifest.value("sc_paths", 0);
  const bool execute = manifest.value("execute", true);

  BackendOptions backend_opts;
  if (manifest.contains("backend")) {
    const auto& b = manifest.at("backend");
    backend_opts.kind = b.value("kind", "scripted");
    backend_opts.table_path = b.value("table", "");
    backend_opts.model = b.value("model", backend_opts.model);
    backend_opts.base_url = b.value("base_url", backend_opts.base_url);
  }

  auto repo_config = repo::load_repository(paths.repo_path);
  auto rules = rep::RuleSet::from_file(paths.rules_path);
  auto corpus = corpus::DslCorpus::load(paths.corpus_dir);
  auto table = assembler::DecompositionTable::from_file(paths.decomposition_path);
  auto backend = backend_opts.make(paths);

  fs::create_directories(out_dir);

  const size_t total = cases.size() * seeds.size();
  std::vector<BatchItem> items(total);
  std::atomic<size_t> next{0};
  std::mutex parse_cache_mutex;
  std::map<size_t, rep::ScenarioRepresentation> parse_cache;
  std::map<size_t, std::string> parse_errors;

  auto parse_case = [&](size_t case_index) -> rep::ScenarioRepresentation {
    std::lock_guard<std::mutex> lock(parse_cache_mutex);
    if (auto it = parse_errors.find(case_index); it != parse_errors.end()) {
      throw ParseError(it->second);
    }
    if (auto it = parse_cache.find(case_index); it != parse_cache.end()) return it->second;
    pipeline::PipelineConfig config = pipeline::PipelineConfig::from_ablation(ablation);
    if (sc_paths > 0) config.sc_paths = sc_paths;
    try {
      auto [representation, trace] =
          pipeline::parse(cases[case_index].text, config, *backend, repo_config, rules);
      (void)trace;
      parse_cache[case_index] = representation;
      return representation;
    } catch (const std::exception& e) {
      parse_errors[case_index] = e.what();
      throw;
    }
  };

  auto work = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= total) return;
      const size_t case_index = i / seeds.size();
      const std::uint64_t seed = seeds[i % seeds.size()];
      BatchItem& item = items[i];
      item.case_index = case_index;
      item.seed = seed;
      const std::string dir =
          out_dir + "/" + std::to_string(case_index) + "_" +
          scenario_slug(cases[case_index].text, seed);
      item.dir = dir;
      try {
        rep::ScenarioRepresentation representation = parse_case(case_index);
        assembler::AssemblyContext context{corpus, repo_config, rules, table};
        auto [document, report] = assembler::assemble(representation, context, seed);
        const std::string bytes = xosc::emit(document);
        fs::create_directories(dir);
        util::write_file(dir + "/scenario.rep.json", rep::serialize(representation));
        util::write_file(dir + "/scenario.xosc", bytes);
        util::write_file(dir + "/assembly.json", report.to_json());
        if (xosc::has_schema_errors(xosc::verify(bytes))) {
          item.status = "read_error";
          item.error = "schema verification failed";
          continue;
        }
        if (execute) {
          try {
            auto imported = xosc::import_document(xosc::load(bytes), corpus);
            auto run_report =
                exec::run(imported, corpus, exec::MonitorSpec{}, exec::LaneFollowEgo{});
            util::write_file(dir + "/report.json", run_report.to_json());
          } catch (const std::exception& e) {
            item.status = "runtime_error";
            item.error = e.what();
            continue;
          }
        }
        item.status = "executable";
      } catch (const std::exception& e) {
        item.status = "read_error";
        item.error = e.what();
      }
    }
  };

  const int pool = std::max(1, workers);
  std::vector<std::thread> threads;
  for (int i = 0; i < pool; ++i) threads.emplace_back(work);
  for (auto& t : threads) t.join();

  // Aggregate: feasibility plus per-slot accuracy when ground truth exists.
  std::vector<metrics::Outcome> outcomes;
  for (const BatchItem& item : items) {
    if (item.status == "executable") outcomes.push_back(metrics::Outcome::Executable);
    else if (item.status == "runtime_error") outcomes.push_back(metrics::Outcome::RuntimeError);
    else outcomes.push_back(metrics::Outcome::ReadError);
  }
  auto feasibility = metrics::feasibility_tally(outcomes);

  ordered_json summary;
  summary["total"] = total;
  summary["feasibility"] = {{"executable", feasibility.executable},
                            {"read_error", feasibility.read_error},
                            {"runtime_error", feasibility.runtime_error}};

  std::vector<std::pair<rep::ScenarioRepresentation, metrics::GroundTruthCase>> scored;
  for (size_t ci = 0; ci < cases.size(); ++ci) {
    if (cases[ci].ground_truth_path.empty()) continue;
    std::lock_guard<std::mutex> lock(parse_cache_mutex);
    auto it = parse_cache.find(ci);
    if (it == parse_cache.end()) continue;
    metrics::GroundTruthCase truth;
    truth.text = cases[ci].text;
    truth.expected = rep::deserialize(util::read_file(cases[ci].ground_truth_path));
    scored.emplace_back(it->second, truth);
  }
  if (!scored.empty()) {
    auto accuracy = metrics::element_accuracy(scored);
    ordered_json per_slot;
    for (const auto& [slot, frac] : accuracy.per_slot) per_slot[slot] = frac;
    summary["element_accuracy"] = per_slot;
    summary["mean_element_accuracy"] = accuracy.mean;
    summary["matching_accuracy"] =
        metrics::matching_accuracy(feasibility.executable, accuracy.mean);
  }

  summary["items"] = ordered_json::array();
  std::string csv = "case,seed,status,dir,error\n";
  for (const BatchItem& item : items) {
    summary["items"].push_back(ordered_json{{"case", item.case_index},
                                            {"seed", item.seed},
                                            {"status", item.status},
                                            {"dir", item.dir},
                                            {"error", item.error}});
    csv += std::to_string(item.case_index) + "," + std::to_string(item.seed) + "," +
           item.status + "," + item.dir + ",\"" + item.error + "\"\n";
  }
  util::write_file(out_dir + "/summary.json", summary.dump(2) + "\n");
  util::write_file(out_dir + "/summary.csv", csv);
  std::cout << out_dir + "/summary.json\n";

  size_t failed = 0;
  for (const BatchItem& item : items) {
    if (item.status != "executable") ++failed;
  }
  std::cerr << "batch: " << (total - failed) << "/" << total << " executable\n";
  return kOk;  // partial success is still success; summary carries the detail
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

int cmd_score(const std::string& ratings_path, const std::string& form,
              const std::string& parsed_dir, const std::string& truth_dir,
              double success_rate, double element_acc) {
  ordered_json out;
  if (!ratings_path.empty()) {
    auto matrix = metrics::RatingMatrix::from_csv(ratings_path);
    out["icc_single"] = metrics::icc_two_way_random(matrix, metrics::IccForm::Single);
    out["icc_average"] = metrics::icc_two_way_random(matrix, metrics::IccForm::Average);
    out["form"] = form;
  }
  if (!parsed_dir.empty() && !truth_dir.empty()) {
    std::vector<std::pair<rep::ScenarioRepresentation, metrics::GroundTruthCase>> results;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(parsed_dir)) {
      if (entry.path().string().ends_with(".rep.json")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& p : files) {
      fs::path truth = fs::path(truth_dir) / p.filename();
      if (!fs::exists(truth)) continue;
      metrics::GroundTruthCase gt;
      gt.expected = rep::deserialize(util::read_file(truth.string()));
      gt.text = gt.expected.source_text;
      results.emplace_back(rep::deserialize(util::read_file(p.string())), gt);
    }
    if (results.empty()) throw ConfigError("score: no matching rep/ground-truth pairs");
    auto accuracy = metrics::element_accuracy(results);
    ordered_json per_slot;
    for (const auto& [slot, frac] : accuracy.per_slot) per_slot[slot] = frac;
    out["element_accuracy"] = per_slot;
    out["mean_element_accuracy"] = accuracy.mean;
    out["cases"] = results.size();
  }
  if (success_rate >= 0.0 && element_acc >= 0.0) {
    out["matching_accuracy"] = metrics::matching_accuracy(success_rate, element_acc);
  }
  if (out.empty()) throw ConfigError("score: nothing to compute; see --help");
  std::cout << out.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// corpus check
// ---------------------------------------------------------------------------

int cmd_corpus_check(const DataPaths& paths) {
  auto repo_config = repo::load_repository(paths.repo_path);
  auto corpus = corpus::DslCorpus::load(paths.corpus_dir);
  auto gaps = corpus::closure_gaps(corpus, repo_config);
  ordered_json out;
  out["fragments"] = corpus.fragments().size();
  out["maps"] = corpus.maps().size();
  out["closure_gaps"] = gaps;
  std::cout << out.dump(2) << "\n";
  return gaps.empty() ? kOk : kUnexpected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scenforge: text-to-scenario compiler and desk-scale executor"};
  app.set_version_flag("--version", std::string(doc::kToolName) + " " + doc::kToolVersion);
  app.require_subcommand(1);

  DataPaths paths;

  // generate
  auto* generate = app.add_subcommand("generate", "Parse a description and emit a scenario");
  std::string text, text_file, ablation = "full", out_dir = ".";
  std::uint64_t seed = 0;
  int sc_paths = 0;
  BackendOptions backend_opts;
  generate->add_option("--text", text, "Scenario description text");
  generate->add_option("--text-file", text_file, "File holding the description text");
  generate->add_option("--ablation", ablation,
                       "Stage prefix: BP, BP-FS, BP-FS-CoT, BP-FS-CoT-SAC or full");
  generate->add_option("--seed", seed, "Assembly seed");
  generate->add_option("--sc-paths", sc_paths, "Self-consistency path count override");
  generate->add_option("--out", out_dir, "Output directory");
  backend_opts.add_options(generate);
  paths.add_options(generate);

  // validate
  auto* validate = app.add_subcommand("validate", "Check a representation for contradictions");
  std::string rep_path;
  validate->add_option("--rep", rep_path, "Representation .rep.json")->required();
  paths.add_options(validate);

  // batch
  auto* batch = app.add_subcommand("batch", "Fan out texts x seeds from a manifest");
  std::string manifest_path;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  batch->add_option("--manifest", manifest_path, "Run manifest JSON")->required();
  batch->add_option("--workers", workers, "Worker pool size");
  paths.add_options(batch);

  // run
  auto* run_cmd = app.add_subcommand("run", "Execute a .xosc scenario with monitors");
  std::string xosc_path, ego_kind = "lane_follow", trace_path, report_path;
  double timeout_override = 0.0;
  run_cmd->add_option("--xosc", xosc_path, "Scenario file")->required();
  run_cmd->add_option("--ego", ego_kind, "Ego policy: lane_follow or scripted")
      ->check(CLI::IsMember({"lane_follow", "scripted"}));
  run_cmd->add_option("--trace", trace_path, "Scripted ego trace JSON");
  run_cmd->add_option("--out", report_path, "Report output path");
  run_cmd->add_option("--timeout", timeout_override, "Override the time limit (s)");
  paths.add_options(run_cmd);

  // score
  auto* score = app.add_subcommand("score", "Corpus statistics: accuracy, ICC, matching");
  std::string ratings_path, form = "single", parsed_dir, truth_dir;
  double success_rate = -1.0, element_acc = -1.0;
  score->add_option("--ratings", ratings_path, "Subjects x raters CSV");
  score->add_option("--form", form, "ICC form: single or average")
      ->check(CLI::IsMember({"single", "average"}));
  score->add_option("--parsed", parsed_dir, "Directory of parsed .rep.json files");
  score->add_option("--truth", truth_dir, "Directory of ground-truth .rep.json files");
  score->add_option("--success-rate", success_rate, "Execution success rate in [0,1]");
  score->add_option("--element-accuracy", element_acc, "Average element accuracy in [0,1]");
  paths.add_options(score);

  // corpus check
  auto* corpus_cmd = app.add_subcommand("corpus", "Corpus maintenance");
  auto* corpus_check = corpus_cmd->add_subcommand("check", "Load, validate and closure-check");
  paths.add_options(corpus_check);

  CLI11_PARSE(app, argc, argv);

  try {
    paths.resolve();
    if (generate->parsed()) {
      if (text.empty() && !text_file.empty()) text = util::trim(util::read_file(text_file));
      if (text.empty()) throw ConfigError("generate: provide --text or --text-file");
      return cmd_generate(text, ablation, sc_paths, backend_opts, paths, out_dir, seed);
    }
    if (validate->parsed()) return cmd_validate(rep_path, paths);
    if (batch->parsed()) return cmd_batch(manifest_path, workers, paths);
    if (run_cmd->parsed()) {
      return cmd_run(xosc_path, ego_kind, trace_path, report_path, timeout_override, paths);
    }
    if (score->parsed()) {
      return cmd_score(ratings_path, form, parsed_dir, truth_dir, success_rate, element_acc);
    }
    if (corpus_cmd->parsed() && corpus_check->parsed()) return cmd_corpus_check(paths);
    std::cerr << app.help() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    return classify_and_report(e);
  }
}
