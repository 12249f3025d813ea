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

#include <cstdlib>
#include <doctest.h>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <unistd.h>

#include "helpers.hpp"
#include "scenforge/util.hpp"

namespace fs = std::filesystem;
using scenforge::util::read_file;
using scenforge::util::write_file;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("scenforge_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args, const std::string& log_path) {
  const std::string cmd = std::string(SCENFORGE_CLI_BIN) + " " + args + " > " +
                          log_path + " 2> " + log_path + ".err";
  int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

const char* kGoldenText = "Unprotected left turn for traffic vehicle";

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

TEST_CASE("generate: golden scripted text writes three artifacts") {
  TempDir tmp;
  const std::string out = tmp / "gen";
  int code = run_cli("generate --text " + quoted(kGoldenText) +
                         " --backend scripted --seed 11 --out " + out,
                     tmp / "log");
  CHECK(code == 0);
  const std::string base = out + "/unprotected_left_turn_for_traffic_vehicle_s11";
  CHECK(fs::exists(base + ".rep.json"));
  CHECK(fs::exists(base + ".xosc"));
  CHECK(fs::exists(base + ".trace.json"));
  const std::string rep = read_file(base + ".rep.json");
  CHECK(rep.find("\"yield\"") != std::string::npos);

  // deterministic rerun: identical bytes
  const std::string xosc_before = read_file(base + ".xosc");
  code = run_cli("generate --text " + quoted(kGoldenText) +
                     " --backend scripted --seed 11 --out " + out,
                 tmp / "log2");
  CHECK(code == 0);
  CHECK(read_file(base + ".xosc") == xosc_before);
}

TEST_CASE("generate: remote backend without API key exits 5") {
  TempDir tmp;
  unsetenv("SCENFORGE_API_KEY");
  int code = run_cli("generate --text x --backend remote --out " + (tmp / "gen"),
                     tmp / "log");
  CHECK(code == 5);
  const std::string err = read_file((tmp / "log") + ".err");
  CHECK(err.find("ConfigError") != std::string::npos);
  CHECK(err.find("SCENFORGE_API_KEY") != std::string::npos);
}

TEST_CASE("generate: contradictory scripted output exits 2") {
  TempDir tmp;
  // craft a table whose response pairs an intersection with a broken line
  const char* bad_rep = R"({
 "texts": {"broken combo": {"cot": ["```json\n{\"road_topology\": {\"topology\": \"intersection\"}, \"transportation_facilities\": {\"road_marker\": \"broken line\"}}\n```"],
            "sac": ["```json\n{\"road_topology\": {\"topology\": \"intersection\"}, \"transportation_facilities\": {\"road_marker\": \"broken line\"}}\n```"]}}
})";
  write_file(tmp / "table.json", bad_rep);
  int code = run_cli("generate --text \"broken combo\" --backend scripted "
                     "--scripted-table " + (tmp / "table.json") + " --out " +
                         (tmp / "gen"),
                     tmp / "log");
  CHECK(code == 2);
  const std::string err = read_file((tmp / "log") + ".err");
  CHECK(err.find("ParseFailure") != std::string::npos);
}

TEST_CASE("run: golden scenario with the lane-follow ego produces a report") {
  TempDir tmp;
  const std::string out = tmp / "gen";
  REQUIRE(run_cli("generate --text " + quoted(kGoldenText) +
                      " --backend scripted --seed 11 --out " + out,
                  tmp / "log") == 0);
  const std::string xosc = out + "/unprotected_left_turn_for_traffic_vehicle_s11.xosc";
  int code = run_cli("run --xosc " + xosc + " --ego lane_follow --out " +
                         (tmp / "report.json"),
                     tmp / "log2");
  CHECK(code == 0);
  const std::string report = read_file(tmp / "report.json");
  CHECK(report.find("\"counts\"") != std::string::npos);
  CHECK(report.find("\"goal_reached\": true") != std::string::npos);
}

TEST_CASE("run: truncated xosc exits 6, foreign map exits 7") {
  TempDir tmp;
  const std::string out = tmp / "gen";
  REQUIRE(run_cli("generate --text " + quoted(kGoldenText) +
                      " --backend scripted --seed 11 --out " + out,
                  tmp / "log") == 0);
  const std::string xosc = out + "/unprotected_left_turn_for_traffic_vehicle_s11.xosc";
  const std::string bytes = read_file(xosc);
  write_file(tmp / "truncated.xosc", bytes.substr(0, bytes.size() / 3));
  CHECK(run_cli("run --xosc " + (tmp / "truncated.xosc"), tmp / "log2") == 6);

  std::string foreign = bytes;
  auto pos = foreign.find("maps/intersection.map.json");
  REQUIRE(pos != std::string::npos);
  foreign.replace(pos, 26, "maps/nowhere.map.json");
  write_file(tmp / "foreign.xosc", foreign);
  CHECK(run_cli("run --xosc " + (tmp / "foreign.xosc"), tmp / "log3") == 7);
}

TEST_CASE("validate: contradictions exit 2, clean reps exit 0") {
  TempDir tmp;
  auto rep = testhelpers::left_turn_rep();
  write_file(tmp / "clean.rep.json", scenforge::rep::serialize(rep));
  CHECK(run_cli("validate --rep " + (tmp / "clean.rep.json"), tmp / "log") == 0);

  rep.transportation_facilities.road_marker = "broken_line";
  write_file(tmp / "bad.rep.json", scenforge::rep::serialize(rep));
  CHECK(run_cli("validate --rep " + (tmp / "bad.rep.json"), tmp / "log2") == 2);
  const std::string out = read_file(tmp / "log2");
  CHECK(out.find("R1") != std::string::npos);
}

TEST_CASE("corpus check passes on the bundled corpus") {
  TempDir tmp;
  CHECK(run_cli("corpus check", tmp / "log") == 0);
  const std::string out = read_file(tmp / "log");
  CHECK(out.find("\"closure_gaps\": []") != std::string::npos);
}

TEST_CASE("batch: fan-out, partial success and deterministic summaries") {
  TempDir tmp;
  const std::string data = testhelpers::data_dir();
  // two good texts and one poisoned (no scripted entry)
  nlohmann::json manifest = {
      {"texts",
       {kGoldenText,
        "Lead vehicle decelerates suddenly on a two-lane straight road and the "
        "following vehicle must respond.",
        "text with no table entry"}},
      {"seeds", {7, 11}},
      {"out", tmp / "batch"},
      {"backend", {{"kind", "scripted"}, {"table", data + "/demo/scripted_table.json"}}}};
  write_file(tmp / "manifest.json", manifest.dump(2));

  int code = run_cli("batch --manifest " + (tmp / "manifest.json") + " --workers 4",
                     tmp / "log");
  CHECK(code == 0);
  const std::string summary = read_file((tmp / "batch") + "/summary.json");
  CHECK(fs::exists((tmp / "batch") + "/summary.csv"));
  nlohmann::json parsed = nlohmann::json::parse(summary);
  CHECK(parsed.at("total") == 6);  // 3 texts x 2 seeds
  int executable = 0, read_error = 0;
  for (const auto& item : parsed.at("items")) {
    if (item.at("status") == "executable") ++executable;
    if (item.at("status") == "read_error") ++read_error;
  }
  CHECK(executable == 4);
  CHECK(read_error == 2);  // the poisoned text, both seeds

  // rerun into a fresh directory: summaries match apart from the path prefix
  nlohmann::json manifest2 = manifest;
  manifest2["out"] = tmp / "batch2";
  write_file(tmp / "manifest2.json", manifest2.dump(2));
  REQUIRE(run_cli("batch --manifest " + (tmp / "manifest2.json") + " --workers 1",
                  tmp / "log2") == 0);
  std::string second = read_file((tmp / "batch2") + "/summary.json");
  std::string normalized = summary;
  // normalize the differing directory names
  auto replace_all = [](std::string s, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
    return s;
  };
  normalized = replace_all(normalized, tmp / "batch", "OUT");
  second = replace_all(second, tmp / "batch2", "OUT");
  CHECK(normalized == second);
}

TEST_CASE("score: matching accuracy and ICC from a ratings CSV") {
  TempDir tmp;
  CHECK(run_cli("score --success-rate 0.8731 --element-accuracy 0.92", tmp / "log") == 0);
  const std::string out = read_file(tmp / "log");
  CHECK(out.find("0.803") != std::string::npos);

  write_file(tmp / "ratings.csv", "0.9,0.8,1.0\n0.4,0.5,0.4\n0.7,0.6,0.8\n0.2,0.3,0.2\n");
  CHECK(run_cli("score --ratings " + (tmp / "ratings.csv"), tmp / "log2") == 0);
  const std::string icc = read_file(tmp / "log2");
  CHECK(icc.find("icc_single") != std::string::npos);
  CHECK(icc.find("icc_average") != std::string::npos);
}
