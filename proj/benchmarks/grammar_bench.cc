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

#include <benchmark/benchmark.h>

#include "evoflow/grammar.h"
#include "evoflow/search.h"

namespace evoflow {
namespace {

void BM_ParseDefaultGrammar(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(grammar::ParseGrammar(grammar::DefaultGrammarText()));
  }
}
BENCHMARK(BM_ParseDefaultGrammar);

void BM_RemoveAlgorithm(benchmark::State& state) {
  const grammar::Grammar& g = grammar::DefaultGrammar();
  for (auto _ : state) benchmark::DoNotOptimize(grammar::RemoveAlgorithm(g, "decisionTree"));
}
BENCHMARK(BM_RemoveAlgorithm);

void BM_RandomIndividual(benchmark::State& state) {
  const grammar::Grammar& g = grammar::DefaultGrammar();
  search::Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(search::RandomIndividual(g, search::kDefaultMaxDerivations, rng));
  }
}
BENCHMARK(BM_RandomIndividual);

void BM_CrossoverAndMutate(benchmark::State& state) {
  const grammar::Grammar& g = grammar::DefaultGrammar();
  search::Rng rng(2);
  const auto a = search::RandomIndividual(g, search::kDefaultMaxDerivations, rng);
  const auto b = search::RandomIndividual(g, search::kDefaultMaxDerivations, rng);
  for (auto _ : state) {
    auto [c1, c2] = search::Crossover(a, b, g, search::kDefaultMaxDerivations, rng);
    benchmark::DoNotOptimize(search::Mutate(c1, g, search::kDefaultMaxDerivations, rng));
  }
}
BENCHMARK(BM_CrossoverAndMutate);

}  // namespace
}  // namespace evoflow

BENCHMARK_MAIN();
