// Copyright 2026 The karr-assess Authors.
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

#ifndef KARR_ERRORS_HPP_
#define KARR_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace karr {

// Base of everything this library throws on bad input or failed backends.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. line() is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input parses but violates a domain invariant (missing ids, duplicates, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Every alias of a fact's object was out of vocabulary for the scorer.
class ObjectAllOovError : public Error {
 public:
  using Error::Error;
};

// Backend unreachable, timed out, or spoke the protocol wrong. Retryable;
// never confused with OOV.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Backend lacks an optional capability (e.g. top-k generation).
class UnsupportedCapability : public Error {
 public:
  using Error::Error;
};

}  // namespace karr

#endif  // KARR_ERRORS_HPP_
