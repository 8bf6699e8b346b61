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

// Small string and statistics helpers shared across modules.

#ifndef EVOFLOW_UTIL_H_
#define EVOFLOW_UTIL_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evoflow::util {

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double value);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> Split(std::string_view text, char sep);
std::string_view Trim(std::string_view text);

// 64-bit FNV-1a.
std::uint64_t Fnv1a(std::string_view text);

// Mixes a seed with a string key; used to derive independent random streams.
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view key);

double Mean(std::span<const double> values);
// Mean of the middle two for even counts. Requires non-empty input.
double Median(std::vector<double> values);
// Linear-interpolation quantile (numpy's default). Requires non-empty input.
double Quantile(std::vector<double> values, double q);

}  // namespace evoflow::util

#endif  // EVOFLOW_UTIL_H_
