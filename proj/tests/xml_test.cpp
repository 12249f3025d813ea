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

#include "scenforge/errors.hpp"
#include "scenforge/xml.hpp"

using namespace scenforge;

TEST_CASE("writer emits prolog, 2-space indent, LF") {
  xml::Node root("A");
  root.attr("x", "1");
  xml::Node child("B");
  child.attr("y", "two words");
  root.child(child);
  const std::string out = xml::write_document(root);
  CHECK(out ==
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<A x=\"1\">\n"
        "  <B y=\"two words\"/>\n"
        "</A>\n");
}

TEST_CASE("parse-write round trip is a fixed point") {
  const std::string src =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<Root a=\"1\" b=\"x &amp; y\">\n"
      "  <Leaf/>\n"
      "  <Text>hello &lt;world&gt;</Text>\n"
      "</Root>\n";
  xml::Node tree = xml::parse_document(src);
  const std::string emitted = xml::write_document(tree);
  CHECK(emitted == src);
  CHECK(xml::parse_document(emitted) == tree);
}

TEST_CASE("attribute order is preserved") {
  xml::Node n = xml::parse_element("<E b=\"2\" a=\"1\" c=\"3\"/>");
  REQUIRE(n.attributes.size() == 3);
  CHECK(n.attributes[0].first == "b");
  CHECK(n.attributes[1].first == "a");
  CHECK(n.attributes[2].first == "c");
}

TEST_CASE("errors carry line and column") {
  try {
    xml::parse_document("<A>\n  <B>\n</A>");
    FAIL("expected ReadError");
  } catch (const ReadError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("mismatched") != std::string::npos);
  }
  CHECK_THROWS_AS(xml::parse_document("<A attr=oops/>"), ReadError);
  CHECK_THROWS_AS(xml::parse_document("<A><A>"), ReadError);
  CHECK_THROWS_AS(xml::parse_document("not xml"), ReadError);
}

TEST_CASE("truncated document reports a position") {
  try {
    xml::parse_document("<A>\n  <B x=\"1\"");
    FAIL("expected ReadError");
  } catch (const ReadError& e) {
    CHECK(e.line() >= 2);
  }
}

TEST_CASE("comments and declaration are skipped") {
  xml::Node n = xml::parse_document(
      "<?xml version=\"1.0\"?><!-- hi --><R><!-- inner --><C/></R>");
  CHECK(n.name == "R");
  REQUIRE(n.children.size() == 1);
  CHECK(n.children[0].name == "C");
}

TEST_CASE("duplicate attribute rejected") {
  CHECK_THROWS_AS(xml::parse_element("<A x=\"1\" x=\"2\"/>"), ReadError);
}

TEST_CASE("entities decode in text and attributes") {
  xml::Node n = xml::parse_element("<A t=\"a&quot;b\">x &amp; y</A>");
  CHECK(*n.find_attr("t") == "a\"b");
  CHECK(n.text == "x & y");
}
