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

#include "evoflow/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "evoflow/errors.h"
#include "evoflow/interaction.h"
#include "evoflow/util.h"

namespace evoflow::experiment {
namespace {

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << text;
}

double WallSeconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct RawTable {
  std::vector<std::vector<double>> features;
  std::vector<std::string> labels;
};

RawTable ParseRows(std::string_view text, const std::string& name) {
  RawTable table;
  std::size_t columns = 0;
  int line_number = 0;
  bool header = true;
  for (const auto& raw_line : util::Split(text, '\n')) {
    ++line_number;
    std::string_view line = util::Trim(raw_line);
    if (line.empty()) continue;
    auto fields = util::Split(line, ',');
    for (auto& f : fields) f = std::string(util::Trim(f));
    const auto where = [&] { return name + ":" + std::to_string(line_number) + ": "; };
    if (header) {
      if (fields.size() < 2) throw InvalidArgument(where() + "need a feature and a label column");
      columns = fields.size();
      header = false;
      continue;
    }
    if (fields.size() != columns) {
      throw InvalidArgument(where() + "expected " + std::to_string(columns) + " fields, got " +
                            std::to_string(fields.size()));
    }
    std::vector<double> row(columns - 1);
    for (std::size_t j = 0; j + 1 < columns; ++j) {
      const std::string& f = fields[j];
      const char* begin = f.data();
      const char* end = begin + f.size();
      const auto [ptr, ec] = std::from_chars(begin, end, row[j]);
      if (f.empty() || ec != std::errc() || ptr != end || !std::isfinite(row[j])) {
        throw InvalidArgument(where() + "missing or non-numeric value '" + f + "' in column " +
                              std::to_string(j + 1));
      }
    }
    if (fields.back().empty()) throw InvalidArgument(where() + "missing class label");
    table.features.push_back(std::move(row));
    table.labels.push_back(fields.back());
  }
  if (header) throw InvalidArgument(name + ": empty file");
  if (table.labels.empty()) throw InvalidArgument(name + ": no data rows");
  return table;
}

ml::Dataset ToDataset(const RawTable& table, std::vector<std::string> class_names,
                      std::string name) {
  ml::Dataset d;
  d.name = std::move(name);
  d.class_names = std::move(class_names);
  const auto n = static_cast<Eigen::Index>(table.features.size());
  const auto cols = static_cast<Eigen::Index>(table.features.front().size());
  d.features.resize(n, cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      d.features(i, j) = table.features[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  for (const auto& label : table.labels) {
    const auto it = std::find(d.class_names.begin(), d.class_names.end(), label);
    if (it == d.class_names.end()) {
      throw InvalidArgument(d.name + ": class '" + label + "' is unknown to the training data");
    }
    d.labels.push_back(static_cast<int>(it - d.class_names.begin()));
  }
  return d;
}

std::vector<std::string> SortedClasses(const RawTable& table) {
  const std::set<std::string> names(table.labels.begin(), table.labels.end());
  return {names.begin(), names.end()};
}

Split MakeSplit(const ml::Dataset& data, const std::vector<std::size_t>& train_rows,
                const std::vector<std::size_t>& test_rows) {
  Split split{data.Subset(train_rows), data.Subset(test_rows)};
  split.train.name = data.name;
  split.test.name = data.name;
  if (split.train.PresentClasses() < 2) {
    throw InvalidArgument(data.name + ": training part has a single class");
  }
  return split;
}

void ParseConfigValue(engine::EngineConfig& c, const std::string& key, const std::string& value,
                      const std::string& where) {
  const auto as_int = [&]() -> int {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw InvalidArgument(where + "'" + key + "' needs an integer, got '" + value + "'");
    }
    return v;
  };
  const auto as_real = [&]() -> double {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw InvalidArgument(where + "'" + key + "' needs a number, got '" + value + "'");
    }
    return v;
  };
  if (key == "population_size") {
    c.population_size = as_int();
  } else if (key == "crossover_prob") {
    c.crossover_prob = as_real();
  } else if (key == "mutation_prob") {
    c.mutation_prob = as_real();
  } else if (key == "max_derivations") {
    c.max_derivations = as_int();
  } else if (key == "max_generations") {
    c.max_generations = as_int();
  } else if (key == "max_interactions") {
    c.max_interactions = as_int();
  } else if (key == "first_interaction_generation") {
    c.first_interaction_generation = as_int();
  } else if (key == "cv_folds") {
    c.cv_folds = as_int();
  } else if (key == "seed") {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw InvalidArgument(where + "'seed' needs a non-negative integer, got '" + value + "'");
    }
    c.seed = v;
  } else {
    throw InvalidArgument(where + "unknown config key '" + key + "'");
  }
}

// Evaluations in order, each interaction placed before the first evaluation
// of a later generation.
void WriteRunLog(const fs::path& path, const engine::Session& session) {
  std::ostringstream out;
  const auto& log = session.eval_log();
  const auto& interactions = session.interactions();
  std::size_t next = 0;
  for (const auto& entry : log) {
    while (next < interactions.size() && interactions[next].generation < entry.generation) {
      out << Json(interactions[next++]).dump() << '\n';
    }
    out << Json(entry).dump() << '\n';
  }
  while (next < interactions.size()) out << Json(interactions[next++]).dump() << '\n';
  WriteFile(path, out.str());
}

ExperimentResult Collect(const engine::Session& session, const Split& split,
                         std::string profile, std::uint64_t seed, int first_interaction,
                         double wall_time) {
  const auto result = session.Result();
  ExperimentResult r;
  r.dataset = split.train.name;
  r.profile = std::move(profile);
  r.seed = seed;
  r.archive = result.archive.workflow;
  r.archive_record = *result.archive.evaluation;
  r.test_balanced_accuracy = TestBalancedAccuracy(r.archive, split, seed);
  r.timeline = result.timeline;
  r.first_interaction_generation = first_interaction;
  r.wall_time_seconds = wall_time;
  r.interactions = session.interactions();
  return r;
}

fs::path RunDir(const fs::path& root, const ExperimentResult& r) {
  return root / r.dataset / r.profile / ("seed-" + std::to_string(r.seed));
}

void Persist(const std::optional<fs::path>& out_dir, const ExperimentResult& r,
             const engine::Session* session) {
  if (!out_dir) return;
  const fs::path dir = RunDir(*out_dir, r);
  if (session) WriteRunLog(dir / "run.jsonl", *session);
  WriteFile(dir / "result.json", ToJson(r).dump(2) + "\n");
}

std::string Csv(double v) { return util::FormatDouble(v); }

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ml::Dataset ParseCsv(std::string_view text, std::string name) {
  const RawTable table = ParseRows(text, name);
  ml::Dataset d = ToDataset(table, SortedClasses(table), std::move(name));
  return d;
}

ml::Dataset ReadCsv(const fs::path& path) {
  return ParseCsv(ReadFile(path), path.stem().string());
}

Split SplitDataset(const ml::Dataset& data, std::uint64_t seed) {
  data.Check();
  const std::size_t n = data.rows();
  const std::size_t test_total = (n + 2) / 3;
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.num_classes()));
  for (std::size_t i = 0; i < n; ++i) by_class[data.labels[i]].push_back(i);

  // Largest remainder; ties go to the lower class id.
  std::vector<std::size_t> quota(by_class.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const double exact = static_cast<double>(by_class[c].size() * test_total) /
                         static_cast<double>(n);
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < test_total && r < remainders.size(); ++r) {
    ++quota[remainders[r].second];
    ++assigned;
  }

  search::Rng rng(util::DeriveSeed(seed, "split:" + data.name));
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto rows = by_class[c];
    std::shuffle(rows.begin(), rows.end(), rng);
    test_rows.insert(test_rows.end(), rows.begin(),
                     rows.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    train_rows.insert(train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(quota[c]),
                      rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return MakeSplit(data, train_rows, test_rows);
}

Split LoadDataset(const fs::path& path, std::uint64_t seed) {
  return SplitDataset(ReadCsv(path), seed);
}

Split LoadPreSplit(const fs::path& train, const fs::path& test) {
  const RawTable train_table = ParseRows(ReadFile(train), train.string());
  const RawTable test_table = ParseRows(ReadFile(test), test.string());
  if (train_table.features.front().size() != test_table.features.front().size()) {
    throw InvalidArgument("train and test files have different feature counts");
  }
  const auto classes = SortedClasses(train_table);
  const std::string name = train.stem().string();
  Split split{ToDataset(train_table, classes, name), ToDataset(test_table, classes, name)};
  split.train.Check();
  return split;
}

engine::EngineConfig ParseConfig(std::string_view text, engine::EngineConfig base) {
  int line_number = 0;
  for (const auto& raw : util::Split(text, '\n')) {
    ++line_number;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = util::Trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_number) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument(where + "expected key=value");
    ParseConfigValue(base, std::string(util::Trim(line.substr(0, eq))),
                     std::string(util::Trim(line.substr(eq + 1))), where);
  }
  base.Check();
  return base;
}

engine::EngineConfig LoadConfig(const fs::path& path, engine::EngineConfig base) {
  return ParseConfig(ReadFile(path), base);
}

Json ToJson(const ExperimentResult& r) {
  Json j = {{"dataset", r.dataset},
            {"profile", r.profile},
            {"seed", r.seed},
            {"archive", {{"workflow", r.archive}, {"record", r.archive_record}}},
            {"test_balanced_accuracy", r.test_balanced_accuracy},
            {"timeline", r.timeline},
            {"first_interaction_generation", r.first_interaction_generation},
            {"wall_time_seconds", r.wall_time_seconds},
            {"interactions", r.interactions}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

ExperimentResult ResultFromJson(const Json& j) {
  ExperimentResult r;
  j.at("dataset").get_to(r.dataset);
  j.at("profile").get_to(r.profile);
  j.at("seed").get_to(r.seed);
  r.error = j.value("error", std::string());
  if (r.error.empty()) {
    j.at("archive").at("workflow").get_to(r.archive);
    j.at("archive").at("record").get_to(r.archive_record);
  }
  r.test_balanced_accuracy = j.value("test_balanced_accuracy", 0.0);
  r.timeline = j.value("timeline", std::vector<double>{});
  r.first_interaction_generation = j.value("first_interaction_generation", 0);
  r.wall_time_seconds = j.value("wall_time_seconds", 0.0);
  if (const auto it = j.find("interactions"); it != j.end()) {
    for (const auto& item : *it) {
      engine::InteractionRecord rec;
      item.at("generation").get_to(rec.generation);
      item.at("thresholds").get_to(rec.thresholds);
      item.at("removed_algorithms").get_to(rec.removed_algorithms);
      item.at("removed_hyperparameter_values").get_to(rec.removed_hyperparameter_values);
      item.at("decision").get_to(rec.decision);
      item.at("wall_time_spent_seconds").get_to(rec.wall_time_spent_seconds);
      r.interactions.push_back(std::move(rec));
    }
  }
  return r;
}

double TestBalancedAccuracy(const search::WorkflowSpec& workflow, const Split& split,
                            std::uint64_t seed) {
  search::Rng rng(util::DeriveSeed(seed, "test:" + workflow.canonical_key));
  try {
    const auto pipeline = ml::FitPipeline(workflow, split.train, rng);
    const auto predicted = ml::PredictPipeline(pipeline, split.test.features);
    return evaluation::BalancedAccuracy(split.test.labels, predicted);
  } catch (const AlgorithmFailure&) {
    return 0.0;
  }
}

ExperimentResult RunBaseline(const Split& split, engine::EngineConfig config,
                             std::uint64_t seed, const std::optional<fs::path>& out_dir,
                             const ClockFactory& clock) {
  config.seed = seed;
  config.max_interactions = 0;
  const double start = WallSeconds();
  std::shared_ptr<engine::RunObserver> observer;
  std::optional<fs::path> dir;
  if (out_dir) {
    fs::create_directories(*out_dir);
    observer = std::make_shared<engine::JsonlRunLog>((*out_dir / "run.jsonl").string());
  }
  auto session = engine::Session::Start(config, grammar::DefaultGrammar(),
                                        std::make_shared<ml::Dataset>(split.train),
                                        clock ? clock() : nullptr, observer);
  session.RunUntilPause();
  observer.reset();
  session.SetObserver(nullptr);
  auto r = Collect(session, split, std::string(kBaselineProfile), seed,
                   config.first_interaction_generation, WallSeconds() - start);
  if (out_dir) WriteFile(*out_dir / "result.json", ToJson(r).dump(2) + "\n");
  return r;
}

std::vector<ExperimentResult> RunSweep(const SweepOptions& options) {
  if (options.repeats < 1) throw InvalidArgument("repeats must be at least 1");
  std::vector<Split> splits;
  for (const auto& path : options.datasets) {
    splits.push_back(LoadDataset(path, options.base_seed));
  }
  const simusers::Schedule schedule = simusers::ScaledSchedule(options.config.max_generations);
  engine::EngineConfig config = options.config;
  config.first_interaction_generation = schedule.interactions.front();
  config.max_interactions = static_cast<int>(schedule.interactions.size());
  config.Check();

  struct Task {
    std::size_t dataset;
    int repeat;
  };
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < splits.size(); ++d) {
    for (int r = 0; r < options.repeats; ++r) tasks.push_back({d, r});
  }
  const std::size_t per_task = options.profiles.size() + 1;
  std::vector<ExperimentResult> results(tasks.size() * per_task);

  const auto run_task = [&](std::size_t t) {
    const Task& task = tasks[t];
    const Split& split = splits[task.dataset];
    const std::uint64_t seed = options.base_seed + static_cast<std::uint64_t>(task.repeat);
    auto slot = results.begin() + static_cast<std::ptrdiff_t>(t * per_task);
    const auto failed = [&](std::size_t i, const std::string& profile, const std::string& what) {
      slot[i].dataset = split.train.name;
      slot[i].profile = profile;
      slot[i].seed = seed;
      slot[i].first_interaction_generation = config.first_interaction_generation;
      slot[i].error = what;
      Persist(options.out_dir, slot[i], nullptr);
    };

    engine::EngineConfig run_config = config;
    run_config.seed = seed;
    std::optional<engine::Session> prefix;
    double prefix_time = 0.0;
    try {
      const double start = WallSeconds();
      prefix.emplace(engine::Session::Start(run_config, grammar::DefaultGrammar(),
                                            std::make_shared<ml::Dataset>(split.train),
                                            options.clock ? options.clock() : nullptr));
      prefix->RunUntilPause();
      prefix_time = WallSeconds() - start;
    } catch (const std::exception& e) {
      failed(0, std::string(kBaselineProfile), e.what());
      for (std::size_t p = 0; p < options.profiles.size(); ++p) {
        failed(p + 1, options.profiles[p].id(), e.what());
      }
      return;
    }

    for (std::size_t i = 0; i < per_task; ++i) {
      const std::string profile =
          i == 0 ? std::string(kBaselineProfile) : options.profiles[i - 1].id();
      try {
        const double start = WallSeconds();
        engine::Session session = prefix->Fork();
        if (i == 0) {
          session.EndInteractions();
          session.RunUntilPause();
        } else {
          simusers::RunToEnd(options.profiles[i - 1], session, schedule);
        }
        slot[i] = Collect(session, split, profile, seed, config.first_interaction_generation,
                          prefix_time + WallSeconds() - start);
        Persist(options.out_dir, slot[i], &session);
      } catch (const std::exception& e) {
        failed(i, profile, e.what());
      }
    }
  };

  const auto workers = static_cast<std::size_t>(std::max(1, options.jobs));
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, tasks.size()); ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) run_task(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return results;
}

Report BuildReport(std::vector<ExperimentResult> results) {
  Report report;
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    const auto rank = [](const ExperimentResult& r) { return r.profile != kBaselineProfile; };
    return std::tuple(a.dataset, rank(a), a.profile, a.seed) <
           std::tuple(b.dataset, rank(b), b.profile, b.seed);
  });
  report.runs = results;

  std::map<std::pair<std::string, std::uint64_t>, const ExperimentResult*> baselines;
  // Profiles in report order: baseline first, then lexicographic.
  std::vector<std::string> profiles;
  std::set<std::string> datasets;
  for (const auto& r : results) {
    if (!r.error.empty()) continue;
    datasets.insert(r.dataset);
    if (std::find(profiles.begin(), profiles.end(), r.profile) == profiles.end()) {
      profiles.push_back(r.profile);
    }
    if (r.profile == kBaselineProfile) baselines[{r.dataset, r.seed}] = &r;
  }
  std::stable_sort(profiles.begin(), profiles.end(), [](const auto& a, const auto& b) {
    return std::pair(a != kBaselineProfile, a) < std::pair(b != kBaselineProfile, b);
  });

  std::vector<std::string> scopes(datasets.begin(), datasets.end());
  if (datasets.size() > 1) scopes.push_back("all");
  for (const auto& scope : scopes) {
    const auto in_scope = [&](const ExperimentResult& r) {
      return r.error.empty() && (scope == "all" || r.dataset == scope);
    };
    std::optional<double> baseline_mean;
    for (const auto& profile : profiles) {
      std::vector<double> fitness, test, speedups, ratios;
      for (const auto& r : results) {
        if (!in_scope(r) || r.profile != profile) continue;
        fitness.push_back(r.archive_record.fitness);
        test.push_back(r.test_balanced_accuracy);
        if (profile == kBaselineProfile) continue;
        const auto base = baselines.find({r.dataset, r.seed});
        if (base == baselines.end()) continue;
        try {
          const double b = simusers::WindowTime(base->second->timeline,
                                                r.first_interaction_generation);
          const double w = simusers::WindowTime(r.timeline, r.first_interaction_generation);
          if (w > 0.0 && b > 0.0) {
            speedups.push_back(b / w);
            ratios.push_back(w / b);
          }
        } catch (const InvalidArgument&) {
        }
      }
      if (fitness.empty()) continue;
      const double mean = util::Mean(fitness);
      if (profile == kBaselineProfile) baseline_mean = mean;
      report.fitness.push_back({scope, profile, static_cast<int>(fitness.size()), mean,
                                baseline_mean ? mean - *baseline_mean : 0.0,
                                util::Mean(test)});
      if (!speedups.empty()) {
        report.speedup.push_back({scope, profile, static_cast<int>(speedups.size()),
                                  util::Quantile(speedups, 0.25), util::Median(speedups),
                                  util::Quantile(speedups, 0.75), util::Median(ratios)});
      }
    }
  }
  return report;
}

std::vector<ExperimentResult> LoadResults(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "result.json") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw InvalidArgument("no result.json files under '" + dir.string() + "'");
  std::sort(files.begin(), files.end());
  std::vector<ExperimentResult> out;
  for (const auto& f : files) {
    try {
      out.push_back(ResultFromJson(Json::parse(ReadFile(f))));
    } catch (const Json::exception& e) {
      throw InvalidArgument(f.string() + ": " + e.what());
    }
  }
  return out;
}

void WriteReport(const Report& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::ostringstream fitness;
  fitness << "dataset,profile,runs,mean_fitness,delta_vs_baseline,mean_test_accuracy\n";
  for (const auto& r : report.fitness) {
    fitness << CsvField(r.dataset) << ',' << CsvField(r.profile) << ',' << r.runs << ','
            << Csv(r.mean_fitness) << ',' << Csv(r.delta_vs_baseline) << ','
            << Csv(r.mean_test_accuracy) << '\n';
  }
  WriteFile(out_dir / "fitness.csv", fitness.str());

  std::ostringstream speedup;
  speedup << "dataset,profile,runs,speedup_q1,speedup_median,speedup_q3,time_ratio_median\n";
  for (const auto& r : report.speedup) {
    speedup << CsvField(r.dataset) << ',' << CsvField(r.profile) << ',' << r.runs << ','
            << Csv(r.speedup_q1) << ',' << Csv(r.speedup_median) << ',' << Csv(r.speedup_q3)
            << ',' << Csv(r.time_ratio_median) << '\n';
  }
  WriteFile(out_dir / "speedup.csv", speedup.str());

  std::ostringstream runs;
  runs << "dataset,profile,seed,fitness,eval_time,test_balanced_accuracy,"
          "cumulative_eval_time,window_eval_time,wall_time_seconds,archive,error\n";
  for (const auto& r : report.runs) {
    double window = 0.0;
    if (r.error.empty() && static_cast<std::size_t>(r.first_interaction_generation) <
                               r.timeline.size()) {
      window = simusers::WindowTime(r.timeline, r.first_interaction_generation);
    }
    runs << CsvField(r.dataset) << ',' << CsvField(r.profile) << ',' << r.seed << ','
         << Csv(r.archive_record.fitness) << ',' << Csv(r.archive_record.eval_time) << ','
         << Csv(r.test_balanced_accuracy) << ','
         << Csv(r.timeline.empty() ? 0.0 : r.timeline.back()) << ',' << Csv(window) << ','
         << Csv(r.wall_time_seconds) << ',' << CsvField(r.archive.canonical_key) << ','
         << CsvField(r.error) << '\n';
  }
  WriteFile(out_dir / "runs.csv", runs.str());
  WriteFile(out_dir / "report.txt", FormatReport(report));
}

std::string FormatReport(const Report& report) {
  std::ostringstream out;
  out << std::fixed;
  out << "Final archive fitness\n";
  out << std::left << std::setw(14) << "dataset" << std::setw(16) << "profile" << std::right
      << std::setw(6) << "runs" << std::setw(10) << "fitness" << std::setw(10) << "delta"
      << std::setw(10) << "test" << '\n';
  for (const auto& r : report.fitness) {
    out << std::left << std::setw(14) << r.dataset << std::setw(16) << r.profile << std::right
        << std::setw(6) << r.runs << std::setprecision(4) << std::setw(10) << r.mean_fitness
        << std::setw(10) << std::showpos << r.delta_vs_baseline << std::noshowpos
        << std::setw(10) << r.mean_test_accuracy << '\n';
  }
  out << "\nSpeedup over the post-interaction window\n";
  out << std::left << std::setw(14) << "dataset" << std::setw(16) << "profile" << std::right
      << std::setw(6) << "runs" << std::setw(10) << "q1" << std::setw(10) << "median"
      << std::setw(10) << "q3" << std::setw(10) << "ratio" << '\n';
  if (report.speedup.empty()) out << "(no interactive runs with a matching baseline)\n";
  for (const auto& r : report.speedup) {
    out << std::left << std::setw(14) << r.dataset << std::setw(16) << r.profile << std::right
        << std::setw(6) << r.runs << std::setprecision(4) << std::setw(10) << r.speedup_q1
        << std::setw(10) << r.speedup_median << std::setw(10) << r.speedup_q3 << std::setw(10)
        << r.time_ratio_median << '\n';
  }
  return out.str();
}

}  // namespace evoflow::experiment
