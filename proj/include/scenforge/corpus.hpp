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

#ifndef SCENFORGE_CORPUS_HPP
#define SCENFORGE_CORPUS_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scenforge/lane_map.hpp"
#include "scenforge/repository.hpp"

namespace scenforge::corpus {

enum class FragmentKind { Weather, MapRef, SpawnActor, Event, Monitor, Autopilot };

const char* fragment_kind_str(FragmentKind kind);
std::optional<FragmentKind> fragment_kind_from_str(const std::string& s);

struct ParamSpec {
  enum class Type { Number, String };
  std::string name;
  Type type = Type::Number;
  std::string unit;  // informational, e.g. "m/s"
  std::optional<std::string> default_value;
  std::optional<double> min;
  std::optional<double> max;
};

// A parameterized OpenSCENARIO snippet. Placeholders use {{name}} syntax.
struct Fragment {
  std::string fragment_id;
  FragmentKind kind = FragmentKind::Event;
  std::string template_text;
  std::vector<ParamSpec> params;
  std::set<std::string> provides;

  const ParamSpec* find_param(const std::string& name) const;
};

using Bindings = std::map<std::string, std::string>;

// Substitutes every placeholder; defaults fill unbound params. Throws
// MissingParamError when a param without a default is unbound, RangeError
// when a numeric binding leaves its legal range.
std::string instantiate(const Fragment& frag, const Bindings& bindings);

class DslCorpus {
public:
  // Loads fragments/index.json + fragments/*.xml.tmpl + maps/*.map.json from
  // a corpus directory. Validates placeholder/param agreement, default
  // instantiation well-formedness and map invariants.
  static DslCorpus load(const std::string& dir);

  // All fragments whose provides-set contains the element, in stable
  // fragment_id order. Empty result is valid; callers decide severity.
  std::vector<const Fragment*> lookup_fragments(const std::string& element,
                                                std::optional<FragmentKind> kind = {}) const;

  const Fragment* find_fragment(const std::string& fragment_id) const;
  const Fragment& fragment(const std::string& fragment_id) const;

  const std::vector<Fragment>& fragments() const { return fragments_; }
  const std::vector<MiniMap>& maps() const { return maps_; }
  const MiniMap* find_map(const std::string& map_id) const;
  const MiniMap& map(const std::string& map_id) const;

  // Maps whose topology_tags contain the tag, declaration order.
  std::vector<const MiniMap*> maps_with_tag(const std::string& tag) const;

private:
  std::vector<Fragment> fragments_;
  std::vector<MiniMap> maps_;
};

// Canonical elements of the closed slots (RT.*, C.*, TF.*) that have no
// providing fragment. The "none" sentinel is exempt. Empty means the corpus
// covers the repository.
std::vector<std::string> closure_gaps(const DslCorpus& corpus,
                                      const repo::RepositoryConfig& config);

}  // namespace scenforge::corpus

#endif  // SCENFORGE_CORPUS_HPP
