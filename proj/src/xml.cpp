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

#include "scenforge/xml.hpp"

#include <cctype>
#include <sstream>

#include "scenforge/errors.hpp"
#include "scenforge/util.hpp"

namespace scenforge::xml {

Node& Node::attr(const std::string& key, const std::string& value) {
  attributes.emplace_back(key, value);
  return *this;
}

Node& Node::child(Node n) {
  children.push_back(std::move(n));
  return *this;
}

const std::string* Node::find_attr(const std::string& key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

const Node* Node::find_child(const std::string& child_name) const {
  for (const auto& c : children) {
    if (c.name == child_name) return &c;
  }
  return nullptr;
}

std::vector<const Node*> Node::find_children(const std::string& child_name) const {
  std::vector<const Node*> out;
  for (const auto& c : children) {
    if (c.name == child_name) out.push_back(&c);
  }
  return out;
}

const Node* Node::find_descendant(const std::string& node_name) const {
  for (const auto& c : children) {
    if (c.name == node_name) return &c;
    if (const Node* hit = c.find_descendant(node_name)) return hit;
  }
  return nullptr;
}

bool Node::operator==(const Node& other) const {
  return name == other.name && attributes == other.attributes &&
         text == other.text && children == other.children;
}

std::string escape_text(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string escape_attr(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

namespace {

void write_node(std::ostringstream& out, const Node& node, int level) {
  std::string pad(static_cast<size_t>(level) * 2, ' ');
  out << pad << '<' << node.name;
  for (const auto& [k, v] : node.attributes) {
    out << ' ' << k << "=\"" << escape_attr(v) << '"';
  }
  if (node.children.empty() && node.text.empty()) {
    out << "/>\n";
    return;
  }
  out << '>';
  if (!node.text.empty()) {
    out << escape_text(node.text);
    if (node.children.empty()) {
      out << "</" << node.name << ">\n";
      return;
    }
    out << '\n';
  } else {
    out << '\n';
  }
  for (const auto& c : node.children) write_node(out, c, level + 1);
  out << pad << "</" << node.name << ">\n";
}

class Parser {
public:
  explicit Parser(const std::string& src) : src_(src) {}

  Node parse_document() {
    skip_prolog_and_misc();
    Node root = parse_element_internal();
    skip_misc();
    if (pos_ < src_.size()) fail("trailing content after root element");
    return root;
  }

  Node parse_single_element() {
    skip_prolog_and_misc();
    return parse_element_internal();
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ReadError("xml: " + msg, line_, col_);
  }

  bool eof() const { return pos_ >= src_.size(); }

  char peek() const { return eof() ? '\0' : src_[pos_]; }

  char get() {
    if (eof()) fail("unexpected end of input");
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  bool consume(const std::string& lit) {
    if (src_.compare(pos_, lit.size(), lit) != 0) return false;
    for (size_t i = 0; i < lit.size(); ++i) get();
    return true;
  }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) get();
  }

  void skip_comment() {
    // positioned after "<!--"
    while (true) {
      if (eof()) fail("unterminated comment");
      if (consume("-->")) return;
      get();
    }
  }

  void skip_misc() {
    while (true) {
      skip_ws();
      if (consume("<!--")) {
        skip_comment();
        continue;
      }
      return;
    }
  }

  void skip_prolog_and_misc() {
    skip_ws();
    if (consume("<?xml")) {
      while (true) {
        if (eof()) fail("unterminated XML declaration");
        if (consume("?>")) break;
        get();
      }
    }
    skip_misc();
  }

  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           c == '.' || c == ':';
  }

  std::string parse_name() {
    std::string name;
    while (!eof() && is_name_char(peek())) name.push_back(get());
    if (name.empty()) fail("expected name");
    return name;
  }

  std::string decode_entities(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      size_t semi = raw.find(';', i);
      if (semi == std::string::npos) fail("unterminated entity");
      std::string ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out.push_back('&');
      else if (ent == "lt") out.push_back('<');
      else if (ent == "gt") out.push_back('>');
      else if (ent == "quot") out.push_back('"');
      else if (ent == "apos") out.push_back('\'');
      else if (!ent.empty() && ent[0] == '#') {
        int code = 0;
        if (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')) {
          code = std::stoi(ent.substr(2), nullptr, 16);
        } else {
          code = std::stoi(ent.substr(1));
        }
        if (code < 0 || code > 127) fail("non-ASCII character reference");
        out.push_back(static_cast<char>(code));
      } else {
        fail("unknown entity &" + ent + ";");
      }
      i = semi;
    }
    return out;
  }

  std::string parse_attr_value() {
    char quote = get();
    if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
    std::string raw;
    while (true) {
      if (eof()) fail("unterminated attribute value");
      char c = get();
      if (c == quote) break;
      if (c == '<') fail("'<' in attribute value");
      raw.push_back(c);
    }
    return decode_entities(raw);
  }

  Node parse_element_internal() {
    if (get() != '<') fail("expected '<'");
    Node node;
    node.name = parse_name();
    while (true) {
      skip_ws();
      if (eof()) fail("unterminated start tag");
      if (consume("/>")) return node;
      if (consume(">")) break;
      std::string key = parse_name();
      skip_ws();
      if (get() != '=') fail("expected '=' after attribute name");
      skip_ws();
      for (const auto& [k, v] : node.attributes) {
        if (k == key) fail("duplicate attribute '" + key + "'");
      }
      node.attributes.emplace_back(key, parse_attr_value());
    }
    // Content: children and/or text. Whitespace-only text is dropped so that
    // pretty-printed output round-trips to the identical tree.
    std::string text;
    while (true) {
      if (eof()) fail("unterminated element <" + node.name + ">");
      if (peek() == '<') {
        if (consume("</")) {
          std::string close = parse_name();
          if (close != node.name) {
            fail("mismatched close tag </" + close + "> for <" + node.name + ">");
          }
          skip_ws();
          if (get() != '>') fail("expected '>' in close tag");
          std::string trimmed = util::trim(text);
          node.text = decode_entities(trimmed);
          return node;
        }
        if (consume("<!--")) {
          skip_comment();
          continue;
        }
        node.children.push_back(parse_element_internal());
        continue;
      }
      text.push_back(get());
    }
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::string write_document(const Node& root) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  write_node(out, root, 0);
  return out.str();
}

std::string write_element(const Node& node, int indent_level) {
  std::ostringstream out;
  write_node(out, node, indent_level);
  return out.str();
}

Node parse_document(const std::string& bytes) {
  Parser p(bytes);
  return p.parse_document();
}

Node parse_element(const std::string& bytes) {
  Parser p(bytes);
  return p.parse_single_element();
}

bool is_well_formed(const std::string& bytes, std::string* error) {
  try {
    parse_document(bytes);
    return true;
  } catch (const ReadError& e) {
    if (error) *error = e.what();
    return false;
  }
}

}  // namespace scenforge::xml
