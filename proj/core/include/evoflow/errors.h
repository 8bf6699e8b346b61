// Copyright 2026 The EvoFlow Authors.
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

#ifndef EVOFLOW_ERRORS_H_
#define EVOFLOW_ERRORS_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace evoflow {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed grammar text. Line and column are 1-based.
class GrammarSyntaxError : public Error {
 public:
  GrammarSyntaxError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// A grammar references a non-terminal that is never defined.
class UndefinedSymbolError : public Error {
 public:
  explicit UndefinedSymbolError(std::string symbol);
  const std::string& symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

// A grammar is invalid, or a removal would make it invalid or named an
// unknown symbol. Any grammar the operation was applied to is left untouched.
class GrammarViolationError : public Error {
 public:
  GrammarViolationError(const std::string& message,
                        std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// A machine-learning step could not be fitted or applied. Evaluation maps it
// to a fitness-0 record.
class AlgorithmFailure : public Error {
 public:
  AlgorithmFailure(std::string algorithm, const std::string& reason);
  const std::string& algorithm() const { return algorithm_; }

 private:
  std::string algorithm_;
};

// An operation was invoked in a session state that does not allow it.
class StateError : public Error {
 public:
  using Error::Error;
};

// Bad configuration, dataset, or argument.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace evoflow

#endif  // EVOFLOW_ERRORS_H_
