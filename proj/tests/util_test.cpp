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

#include "scenforge/util.hpp"

using namespace scenforge;

TEST_CASE("normalize_token folds case, punctuation and separators") {
  CHECK(util::normalize_token("T-Junction") == "t_junction");
  CHECK(util::normalize_token("  Go Forward ") == "go_forward");
  CHECK(util::normalize_token("solid  line") == "solid_line");
  CHECK(util::normalize_token("T-junction.") == "t_junction");
  CHECK(util::normalize_token("cut-in") == "cut_in");
  CHECK(util::normalize_token("") == "");
}

TEST_CASE("format_double renders shortest round-trip form") {
  CHECK(util::format_double(20.0) == "20.0");
  CHECK(util::format_double(0.1) == "0.1");
  CHECK(util::format_double(13.889) == "13.889");
  CHECK(util::format_double(-0.0) == "0.0");
}

TEST_CASE("fnv1a64_hex is stable") {
  CHECK(util::fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(util::fnv1a64_hex("a") == util::fnv1a64_hex("a"));
  CHECK(util::fnv1a64_hex("a") != util::fnv1a64_hex("b"));
}

TEST_CASE("RandomStream is deterministic and in-bounds") {
  util::RandomStream a(42);
  util::RandomStream b(42);
  for (int i = 0; i < 100; ++i) {
    auto va = a.below(17);
    CHECK(va == b.below(17));
    CHECK(va < 17);
  }
  util::RandomStream c(7);
  std::vector<int> v{1, 2, 3, 4, 5, 6};
  std::vector<int> w = v;
  c.shuffle(v);
  util::RandomStream d(7);
  d.shuffle(w);
  CHECK(v == w);
}

TEST_CASE("substream seeds differ per label") {
  CHECK(util::substream_seed(1, "climate") != util::substream_seed(1, "topology"));
  CHECK(util::substream_seed(1, "climate") == util::substream_seed(1, "climate"));
  CHECK(util::substream_seed(1, "climate") != util::substream_seed(2, "climate"));
}
