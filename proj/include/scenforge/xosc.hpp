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

#ifndef SCENFORGE_XOSC_HPP
#define SCENFORGE_XOSC_HPP

#include <string>
#include <vector>

#include "scenforge/corpus.hpp"
#include "scenforge/document.hpp"
#include "scenforge/xml.hpp"

namespace scenforge::xosc {

// A parsed .xosc file: the XML projection of a TargetDocument.
struct XoscDocument {
  xml::Node root;
};

// The XML tree emit() serializes; exposed for structural round-trip checks.
xml::Node build_tree(const doc::TargetDocument& document);

// UTF-8, 2-space indentation, LF endings, fixed attribute order per element
// class. Byte output is a pure function of the document. Throws EmitError
// naming the section that cannot be serialized.
std::string emit(const doc::TargetDocument& document);

// Parses bytes; throws ReadError with line/column on malformed input.
XoscDocument load(const std::string& bytes);

enum class FindingSeverity { Error, Warning };

struct SchemaFinding {
  FindingSeverity severity;
  std::string element;
  std::string message;
};

// Checks the documented schema subset: required children and attributes of
// the elements the assembler emits. Unknown elements are warnings; missing
// required parts and dangling entity references are errors.
std::vector<SchemaFinding> verify(const std::string& bytes);

bool has_schema_errors(const std::vector<SchemaFinding>& findings);

// Rebuilds an executable TargetDocument from a parsed file. The referenced
// mini-map must exist in the corpus (MapMismatchError otherwise).
doc::TargetDocument import_document(const XoscDocument& document,
                                    const corpus::DslCorpus& corpus);

}  // namespace scenforge::xosc

#endif  // SCENFORGE_XOSC_HPP
