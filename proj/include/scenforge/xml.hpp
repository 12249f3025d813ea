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

#ifndef SCENFORGE_XML_HPP
#define SCENFORGE_XML_HPP

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace scenforge::xml {

// Minimal element-tree XML used for .xosc emission and reading back our own
// output. Attribute order is the insertion order, which the writer preserves,
// so emitted bytes are stable. No namespaces, DTDs or CDATA; comments and the
// XML declaration are skipped on read.
struct Node {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Node> children;
  std::string text;  // element text content (no mixed content support)

  Node() = default;
  explicit Node(std::string n) : name(std::move(n)) {}

  Node& attr(const std::string& key, const std::string& value);
  Node& child(Node n);

  const std::string* find_attr(const std::string& key) const;
  const Node* find_child(const std::string& child_name) const;
  std::vector<const Node*> find_children(const std::string& child_name) const;
  // Depth-first search for the first descendant with the given name.
  const Node* find_descendant(const std::string& node_name) const;

  bool operator==(const Node& other) const;
};

// Serializes with a '<?xml version="1.0" encoding="UTF-8"?>' prolog,
// 2-space indentation and LF line endings.
std::string write_document(const Node& root);

// Serializes a bare element (no prolog); used for fragment snippets.
std::string write_element(const Node& node, int indent_level = 0);

// Parses a full document. Throws ReadError with 1-based line/column.
Node parse_document(const std::string& bytes);

// Parses a snippet consisting of exactly one element.
Node parse_element(const std::string& bytes);

bool is_well_formed(const std::string& bytes, std::string* error = nullptr);

std::string escape_text(const std::string& s);
std::string escape_attr(const std::string& s);

}  // namespace scenforge::xml

#endif  // SCENFORGE_XML_HPP
