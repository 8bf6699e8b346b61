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

#include "evoflow/errors.h"

#include <utility>

namespace evoflow {

GrammarSyntaxError::GrammarSyntaxError(const std::string& message, int line,
                                       int column)
    : Error("grammar syntax error at " + std::to_string(line) + ":" +
            std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

UndefinedSymbolError::UndefinedSymbolError(std::string symbol)
    : Error("undefined symbol '" + symbol + "'"), symbol_(std::move(symbol)) {}

GrammarViolationError::GrammarViolationError(const std::string& message,
                                             std::vector<std::string> violations)
    : Error(message), violations_(std::move(violations)) {}

AlgorithmFailure::AlgorithmFailure(std::string algorithm,
                                   const std::string& reason)
    : Error(algorithm + ": " + reason), algorithm_(std::move(algorithm)) {}

}  // namespace evoflow
