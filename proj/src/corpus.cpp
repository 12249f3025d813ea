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

#include "scenforge/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <json.hpp>
#include <set>

#include "scenforge/errors.hpp"
#include "scenforge/util.hpp"
#include "scenforge/xml.hpp"

namespace scenforge::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

const char* fragment_kind_str(FragmentKind kind) {
  switch (kind) {
    case FragmentKind::Weather: return "Weather";
    case FragmentKind::MapRef: return "MapRef";
    case FragmentKind::SpawnActor: return "SpawnActor";
    case FragmentKind::Event: return "Event";
    case FragmentKind::Monitor: return "Monitor";
    case FragmentKind::Autopilot: return "Autopilot";
  }
  return "?";
}

std::optional<FragmentKind> fragment_kind_from_str(const std::string& s) {
  static const std::map<std::string, FragmentKind> kTable = {
      {"Weather", FragmentKind::Weather},   {"MapRef", FragmentKind::MapRef},
      {"SpawnActor", FragmentKind::SpawnActor}, {"Event", FragmentKind::Event},
      {"Monitor", FragmentKind::Monitor},   {"Autopilot", FragmentKind::Autopilot},
  };
  auto it = kTable.find(s);
  if (it == kTable.end()) return std::nullopt;
  return it->second;
}

const ParamSpec* Fragment::find_param(const std::string& name) const {
  for (const ParamSpec& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

namespace {

std::set<std::string> template_placeholders(const std::string& text) {
  std::set<std::string> names;
  size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string::npos) {
    size_t end = text.find("}}", pos + 2);
    if (end == std::string::npos) break;
    names.insert(text.substr(pos + 2, end - pos - 2));
    pos = end + 2;
  }
  return names;
}

double parse_number(const std::string& s, const std::string& param) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw RangeError("param '" + param + "': '" + s + "' is not a number");
  }
  return v;
}

void check_range(const ParamSpec& spec, const std::string& value) {
  if (spec.type != ParamSpec::Type::Number) return;
  double v = parse_number(value, spec.name);
  if ((spec.min && v < *spec.min) || (spec.max && v > *spec.max)) {
    std::string lo = spec.min ? util::format_double(*spec.min) : "-inf";
    std::string hi = spec.max ? util::format_double(*spec.max) : "inf";
    throw RangeError("param '" + spec.name + "': value " + value +
                     " outside legal range [" + lo + ", " + hi + "]");
  }
}

}  // namespace

std::string instantiate(const Fragment& frag, const Bindings& bindings) {
  for (const auto& [name, value] : bindings) {
    const ParamSpec* spec = frag.find_param(name);
    if (!spec) {
      throw MissingParamError("fragment '" + frag.fragment_id +
                              "' has no param '" + name + "'");
    }
    check_range(*spec, value);
  }
  std::string out = frag.template_text;
  for (const ParamSpec& spec : frag.params) {
    std::string value;
    auto it = bindings.find(spec.name);
    if (it != bindings.end()) {
      value = it->second;
    } else if (spec.default_value) {
      value = *spec.default_value;
    } else {
      throw MissingParamError("fragment '" + frag.fragment_id + "': param '" +
                              spec.name + "' has no default and no binding");
    }
    const std::string needle = "{{" + spec.name + "}}";
    size_t pos = 0;
    while ((pos = out.find(needle, pos)) != std::string::npos) {
      out.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }
  if (out.find("{{") != std::string::npos) {
    size_t pos = out.find("{{");
    size_t end = out.find("}}", pos);
    throw MissingParamError("fragment '" + frag.fragment_id +
                            "': unresolved placeholder " +
                            out.substr(pos, end == std::string::npos
                                                ? std::string::npos
                                                : end - pos + 2));
  }
  return out;
}

DslCorpus DslCorpus::load(const std::string& dir) {
  DslCorpus corpus;
  const fs::path root(dir);
  const fs::path index_path = root / "fragments" / "index.json";
  json index;
  try {
    index = json::parse(util::read_file(index_path.string()));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("corpus index: ") + e.what());
  }

  try {
    for (const auto& jf : index.at("fragments")) {
      Fragment frag;
      frag.fragment_id = jf.at("id").get<std::string>();
      auto kind = fragment_kind_from_str(jf.at("kind").get<std::string>());
      if (!kind) {
        throw SchemaError("corpus: fragment '" + frag.fragment_id +
                          "' has unknown kind '" + jf.at("kind").get<std::string>() + "'");
      }
      frag.kind = *kind;
      const std::string file = jf.at("file").get<std::string>();
      frag.template_text = util::read_file((root / "fragments" / file).string());
      for (const auto& p : jf.at("provides")) frag.provides.insert(p.get<std::string>());
      if (jf.contains("params")) {
        for (const auto& jp : jf.at("params")) {
          ParamSpec spec;
          spec.name = jp.at("name").get<std::string>();
          const std::string type = jp.value("type", "number");
          spec.type = type == "string" ? ParamSpec::Type::String : ParamSpec::Type::Number;
          spec.unit = jp.value("unit", "");
          if (jp.contains("default")) {
            const auto& d = jp.at("default");
            spec.default_value = d.is_string() ? d.get<std::string>()
                                               : util::format_double(d.get<double>());
          }
          if (jp.contains("min")) spec.min = jp.at("min").get<double>();
          if (jp.contains("max")) spec.max = jp.at("max").get<double>();
          frag.params.push_back(std::move(spec));
        }
      }
      corpus.fragments_.push_back(std::move(frag));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("corpus index: ") + e.what());
  }

  std::sort(corpus.fragments_.begin(), corpus.fragments_.end(),
            [](const Fragment& a, const Fragment& b) { return a.fragment_id < b.fragment_id; });

  // Load-time validation: ids unique, placeholders declared, defaults legal,
  // default instantiation parses as XML.
  std::set<std::string> ids;
  for (const Fragment& frag : corpus.fragments_) {
    if (!ids.insert(frag.fragment_id).second) {
      throw SchemaError("corpus: duplicate fragment id '" + frag.fragment_id + "'");
    }
    for (const std::string& ph : template_placeholders(frag.template_text)) {
      if (!frag.find_param(ph)) {
        throw SchemaError("corpus: fragment '" + frag.fragment_id +
                          "' uses undeclared placeholder '" + ph + "'");
      }
    }
    Bindings defaults_probe;
    for (const ParamSpec& spec : frag.params) {
      if (spec.default_value) {
        check_range(spec, *spec.default_value);
      } else {
        // Probe value for well-formedness checking only.
        defaults_probe[spec.name] = spec.type == ParamSpec::Type::Number ? "1.0" : "x";
        if (spec.min) defaults_probe[spec.name] = util::format_double(*spec.min);
      }
    }
    const std::string rendered = instantiate(frag, defaults_probe);
    std::string err;
    if (!xml::is_well_formed(rendered, &err)) {
      throw SchemaError("corpus: fragment '" + frag.fragment_id +
                        "' default instantiation is not well-formed XML: " + err);
    }
  }

  const fs::path maps_dir = root / "maps";
  std::vector<fs::path> map_files;
  if (fs::exists(maps_dir)) {
    for (const auto& entry : fs::directory_iterator(maps_dir)) {
      if (entry.path().string().ends_with(".map.json")) map_files.push_back(entry.path());
    }
  }
  std::sort(map_files.begin(), map_files.end());
  for (const fs::path& p : map_files) corpus.maps_.push_back(load_map(p.string()));

  std::set<std::string> map_ids;
  for (const MiniMap& m : corpus.maps_) {
    if (!map_ids.insert(m.map_id).second) {
      throw SchemaError("corpus: duplicate map id '" + m.map_id + "'");
    }
  }
  return corpus;
}

std::vector<const Fragment*> DslCorpus::lookup_fragments(
    const std::string& element, std::optional<FragmentKind> kind) const {
  std::vector<const Fragment*> out;
  for (const Fragment& f : fragments_) {
    if (kind && f.kind != *kind) continue;
    if (f.provides.count(element)) out.push_back(&f);
  }
  return out;  // fragments_ already sorted by id
}

const Fragment* DslCorpus::find_fragment(const std::string& fragment_id) const {
  for (const Fragment& f : fragments_) {
    if (f.fragment_id == fragment_id) return &f;
  }
  return nullptr;
}

const Fragment& DslCorpus::fragment(const std::string& fragment_id) const {
  const Fragment* f = find_fragment(fragment_id);
  if (!f) throw SchemaError("corpus: unknown fragment '" + fragment_id + "'");
  return *f;
}

const MiniMap* DslCorpus::find_map(const std::string& map_id) const {
  for (const MiniMap& m : maps_) {
    if (m.map_id == map_id) return &m;
  }
  return nullptr;
}

const MiniMap& DslCorpus::map(const std::string& map_id) const {
  const MiniMap* m = find_map(map_id);
  if (!m) throw SchemaError("corpus: unknown map '" + map_id + "'");
  return *m;
}

std::vector<const MiniMap*> DslCorpus::maps_with_tag(const std::string& tag) const {
  std::vector<const MiniMap*> out;
  for (const MiniMap& m : maps_) {
    if (m.topology_tags.count(tag)) out.push_back(&m);
  }
  return out;
}

std::vector<std::string> closure_gaps(const DslCorpus& corpus,
                                      const repo::RepositoryConfig& config) {
  std::vector<std::string> missing;
  for (const repo::ElementSlot& slot : config.slots) {
    const bool closed_family = slot.slot_name.rfind("RT.", 0) == 0 ||
                               slot.slot_name.rfind("C.", 0) == 0 ||
                               slot.slot_name.rfind("TF.", 0) == 0;
    if (!closed_family) continue;
    for (const std::string& element : slot.vocabulary) {
      if (element == repo::kNone) continue;
      if (corpus.lookup_fragments(element).empty()) {
        missing.push_back(slot.slot_name + ":" + element);
      }
    }
  }
  return missing;
}

}  // namespace scenforge::corpus
