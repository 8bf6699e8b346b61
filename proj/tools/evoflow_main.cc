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

// evoflow: baseline runs, simulated-user sweeps, the REST service and reports.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "evoflow/errors.h"
#include "evoflow/experiment.h"
#include "evoflow/service.h"
#include "evoflow/simusers.h"

namespace fs = std::filesystem;
using namespace evoflow;

namespace {

service::Service* g_service = nullptr;

void HandleSignal(int) {
  if (g_service != nullptr) g_service->Stop();
}

std::vector<simusers::Profile> SelectProfiles(const std::vector<std::string>& names) {
  if (names.empty() || (names.size() == 1 && names[0] == "all")) return simusers::ProfileSuite();
  std::vector<simusers::Profile> out;
  for (const auto& name : names) out.push_back(simusers::Profile::Parse(name));
  return out;
}

struct Overrides {
  int population = 0;
  int generations = 0;
};

engine::EngineConfig BuildConfig(const std::string& path, const Overrides& o) {
  engine::EngineConfig config;
  if (!path.empty()) config = experiment::LoadConfig(path);
  if (o.population > 0) config.population_size = o.population;
  if (o.generations > 0) config.max_generations = o.generations;
  config.Check();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evoflow: interactive grammar-guided AutoML"};
  app.require_subcommand(1);

  // run-baseline
  auto* baseline = app.add_subcommand("run-baseline", "Run without interactions");
  std::string dataset, train, test, config_path, out_dir;
  std::uint64_t seed = 0;
  Overrides overrides;
  baseline->add_option("--dataset", dataset, "CSV file split 2:1 by seed");
  baseline->add_option("--train", train, "Pre-split training CSV");
  baseline->add_option("--test", test, "Pre-split test CSV");
  baseline->add_option("--config", config_path, "key=value engine config");
  baseline->add_option("--seed", seed, "Run seed")->default_val(0);
  baseline->add_option("--out", out_dir, "Output directory")->required();
  baseline->add_option("--population", overrides.population, "Override population_size");
  baseline->add_option("--generations", overrides.generations, "Override max_generations");

  // run-sweep
  auto* sweep = app.add_subcommand("run-sweep", "Baselines plus simulated user profiles");
  std::vector<std::string> datasets, profiles;
  int repeats = 1, jobs = 1;
  sweep->add_option("--datasets", datasets, "CSV files")->required();
  sweep->add_option("--profiles", profiles, "Profile ids or 'all'")->default_val("all");
  sweep->add_option("--repeats", repeats, "Seeds per dataset")->default_val(1);
  sweep->add_option("--seed", seed, "Base seed")->default_val(0);
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--jobs", jobs, "Concurrent runs")->default_val(1);
  sweep->add_option("--config", config_path, "key=value engine config");
  sweep->add_option("--population", overrides.population, "Override population_size");
  sweep->add_option("--generations", overrides.generations, "Override max_generations");

  // serve
  auto* serve = app.add_subcommand("serve", "REST service hosting interactive sessions");
  int port = 8080;
  std::string host = "127.0.0.1", workdir = ".";
  serve->add_option("--port", port, "TCP port (0 picks one)")->default_val(8080);
  serve->add_option("--host", host, "Bind address")->default_val("127.0.0.1");
  serve->add_option("--workdir", workdir, "datasets/, grammars/, sessions/")->default_val(".");

  // report
  auto* report = app.add_subcommand("report", "Aggregate result.json files");
  std::string in_dir;
  report->add_option("--in", in_dir, "Results directory")->required();
  report->add_option("--out", out_dir, "Report directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (baseline->parsed()) {
      const bool presplit = !train.empty() || !test.empty();
      if (presplit == !dataset.empty() || (presplit && (train.empty() || test.empty()))) {
        throw InvalidArgument("give either --dataset or both --train and --test");
      }
      const auto split = presplit ? experiment::LoadPreSplit(train, test)
                                  : experiment::LoadDataset(dataset, seed);
      const auto r = experiment::RunBaseline(split, BuildConfig(config_path, overrides), seed,
                                             fs::path(out_dir));
      std::cout << "dataset=" << r.dataset << " seed=" << r.seed
                << " archive=" << r.archive.canonical_key << " fitness=" << r.archive_record.fitness
                << " test_balanced_accuracy=" << r.test_balanced_accuracy
                << " generations=" << r.timeline.size() - 1 << "\n";
      return r.error.empty() ? 0 : 1;
    }
    if (sweep->parsed()) {
      experiment::SweepOptions options;
      for (const auto& d : datasets) options.datasets.emplace_back(d);
      options.profiles = SelectProfiles(profiles);
      options.repeats = repeats;
      options.base_seed = seed;
      options.config = BuildConfig(config_path, overrides);
      options.out_dir = fs::path(out_dir);
      options.jobs = jobs;
      auto results = experiment::RunSweep(options);
      int failures = 0;
      for (const auto& r : results) {
        if (!r.error.empty()) {
          ++failures;
          std::cerr << "failed: " << r.dataset << "/" << r.profile << "/seed-" << r.seed << ": "
                    << r.error << "\n";
        }
      }
      const auto rep = experiment::BuildReport(std::move(results));
      experiment::WriteReport(rep, fs::path(out_dir) / "report");
      std::cout << experiment::FormatReport(rep);
      return failures == 0 ? 0 : 1;
    }
    if (serve->parsed()) {
      service::Service svc({fs::path(workdir), nullptr, nullptr});
      g_service = &svc;
      std::signal(SIGINT, HandleSignal);
      std::signal(SIGTERM, HandleSignal);
      const int bound = svc.Start(host, port);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      svc.Wait();
      g_service = nullptr;
      return 0;
    }
    if (report->parsed()) {
      const auto rep = experiment::BuildReport(experiment::LoadResults(in_dir));
      experiment::WriteReport(rep, out_dir);
      std::cout << experiment::FormatReport(rep);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "evoflow: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
