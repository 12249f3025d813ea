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

#ifndef SCENFORGE_ERRORS_HPP
#define SCENFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace scenforge {

// Base class for every error thrown by the library. Each subclass maps to
// exactly one CLI exit code (see tools/scenforge_main.cpp).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed structured input (JSON syntax, bad numbers, ...).
class ParseError : public Error {
public:
  using Error::Error;
};

// Structurally valid input violating a documented invariant.
class SchemaError : public Error {
public:
  using Error::Error;
};

// Bad pipeline or CLI configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Transport / auth failure talking to a model backend.
class BackendError : public Error {
public:
  using Error::Error;
};

// No parseable JSON object in a model response.
class ExtractionError : public Error {
public:
  using Error::Error;
};

// A closed slot received a value that is neither canonical nor a synonym.
class RejectedElementError : public Error {
public:
  using Error::Error;
};

class MissingParamError : public Error {
public:
  using Error::Error;
};

class RangeError : public Error {
public:
  using Error::Error;
};

class UnknownBehaviorError : public Error {
public:
  using Error::Error;
};

// Model-backed decomposition produced an action outside the standard set.
class InvalidDecompositionError : public Error {
public:
  using Error::Error;
};

class NoMatchingMapError : public Error {
public:
  using Error::Error;
};

class NoRouteError : public Error {
public:
  using Error::Error;
};

class NoAdjacentLaneError : public Error {
public:
  using Error::Error;
};

class OffMapError : public Error {
public:
  using Error::Error;
};

class EmitError : public Error {
public:
  using Error::Error;
};

// XML (or scenario file) read failure; carries a 1-based position.
class ReadError : public Error {
public:
  ReadError(const std::string& msg, int line, int column)
      : Error(msg + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

class MapMismatchError : public Error {
public:
  using Error::Error;
};

// Numeric argument outside the documented domain.
class DomainError : public Error {
public:
  using Error::Error;
};

}  // namespace scenforge

#endif  // SCENFORGE_ERRORS_HPP
