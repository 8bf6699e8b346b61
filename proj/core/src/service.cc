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

#include "evoflow/service.h"

#include <httplib.h>

#include <charconv>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <mutex>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include "evoflow/errors.h"
#include "evoflow/interaction.h"
#include "evoflow/util.h"

namespace evoflow::service {
namespace {

namespace fs = std::filesystem;

Response ErrorResponse(int status, const std::string& message,
               const std::vector<std::string>& violations = {}) {
  Json body = {{"error", message}};
  if (!violations.empty()) body["violations"] = violations;
  return {status, body};
}

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

bool SafeName(const std::string& name) {
  static const std::regex kPattern("[A-Za-z0-9_][A-Za-z0-9_.-]*");
  return std::regex_match(name, kPattern) && name.find("..") == std::string::npos;
}

std::optional<double> ParseThreshold(const std::string& text, const std::string& key) {
  if (text.empty() || text == "none" || text == "null") return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidArgument(key + " must be a number or 'none'");
  }
  return value;
}

}  // namespace

// One engine actor. The actor thread alone touches `session`; handlers read
// the published fields under `mu`.
struct SessionActor {
  std::string id;
  std::string dataset_name;
  engine::EngineConfig config;
  std::string created_at;
  fs::path dir;
  std::optional<std::vector<double>> baseline;
  std::shared_ptr<const experiment::Split> split;
  grammar::Grammar initial_grammar;
  std::shared_ptr<evaluation::Clock> eval_clock;

  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::function<void()>> queue;
  bool stopping = false;

  std::string status = "Running";
  int generation = 0;
  int interactions_used = 0;
  std::string error;
  std::shared_ptr<const interaction::InteractionSnapshot> snapshot;
  std::shared_ptr<const std::string> snapshot_body;
  std::shared_ptr<const grammar::Grammar> grammar;
  std::optional<double> snapshot_served_at;
  std::shared_ptr<const Json> result;
  std::vector<double> timeline;

  std::optional<engine::Session> session;
  std::thread thread;

  void Post(std::function<void()> command) {
    {
      std::lock_guard lock(mu);
      queue.push_back(std::move(command));
    }
    cv.notify_one();
  }

  void Loop() {
    for (;;) {
      std::function<void()> command;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        command = std::move(queue.front());
        queue.pop_front();
      }
      try {
        command();
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        status = "Failed";
        error = e.what();
      }
    }
  }

  bool Stopping() {
    std::lock_guard lock(mu);
    return stopping;
  }

  // Runs generations until a pause or the end, publishing progress.
  void Advance() {
    while (session->status() == engine::Status::kRunning) {
      if (Stopping()) return;
      session->StepGeneration();
      std::lock_guard lock(mu);
      generation = session->generation();
      timeline = session->timeline();
    }
    Publish();
  }

  void Publish() {
    std::shared_ptr<const interaction::InteractionSnapshot> snap;
    std::shared_ptr<const std::string> body;
    std::shared_ptr<const Json> res;
    if (session->status() == engine::Status::kAwaitingFeedback) {
      snap = std::make_shared<const interaction::InteractionSnapshot>(
          interaction::BuildSnapshot(*session, baseline ? &*baseline : nullptr));
      body = std::make_shared<const std::string>(Json(*snap).dump());
    } else if (session->status() == engine::Status::kFinished) {
      const auto r = session->Result();
      Json j = {{"session_id", id},
                {"archive", {{"workflow", r.archive.workflow}, {"record", *r.archive.evaluation}}},
                {"cumulative_eval_time", r.cumulative_eval_time},
                {"timeline", r.timeline},
                {"generations", session->generation()},
                {"interactions_used", session->interactions_used()},
                {"test_balanced_accuracy",
                 experiment::TestBalancedAccuracy(r.archive.workflow, *split, config.seed)},
                {"run_log", (dir / "run.jsonl").string()},
                {"interaction_log", (dir / "interactions.jsonl").string()}};
      res = std::make_shared<const Json>(std::move(j));
      session->SetObserver(nullptr);
    }
    std::lock_guard lock(mu);
    status = std::string(engine::ToString(session->status()));
    generation = session->generation();
    interactions_used = session->interactions_used();
    timeline = session->timeline();
    snapshot = snap;
    snapshot_body = body;
    snapshot_served_at.reset();
    grammar = std::make_shared<const grammar::Grammar>(session->grammar());
    if (res) result = res;
  }
};

struct Service::Impl {
  ServiceOptions options;
  std::shared_ptr<evaluation::Clock> clock;
  std::mutex mu;
  std::map<std::string, std::shared_ptr<SessionActor>> sessions;
  std::uint64_t counter = 0;
  std::mt19937_64 id_rng{std::random_device{}()};
  httplib::Server server;
  std::thread server_thread;

  std::shared_ptr<SessionActor> Find(const std::string& id) {
    std::lock_guard lock(mu);
    const auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->clock = impl_->options.clock ? impl_->options.clock
                                      : std::make_shared<evaluation::SteadyClock>();
  fs::create_directories(impl_->options.workdir / "sessions");
}

Service::~Service() {
  Stop();
  Wait();
  std::map<std::string, std::shared_ptr<SessionActor>> sessions;
  {
    std::lock_guard lock(impl_->mu);
    sessions.swap(impl_->sessions);
  }
  for (auto& [id, actor] : sessions) {
    {
      std::lock_guard lock(actor->mu);
      actor->stopping = true;
    }
    actor->cv.notify_all();
    if (actor->thread.joinable()) actor->thread.join();
  }
}

Response Service::CreateSession(const std::string& body) {
  Json request;
  try {
    request = Json::parse(body.empty() ? "{}" : body);
  } catch (const Json::exception& e) {
    return ErrorResponse(400, std::string("malformed JSON: ") + e.what());
  }
  if (!request.is_object()) return ErrorResponse(400, "request must be a JSON object");

  const std::string dataset = request.value("dataset", std::string());
  if (dataset.empty()) return ErrorResponse(422, "missing 'dataset'");
  if (!SafeName(dataset)) return ErrorResponse(404, "unknown dataset '" + dataset + "'");
  const fs::path dataset_path = impl_->options.workdir / "datasets" / (dataset + ".csv");
  if (!fs::is_regular_file(dataset_path)) return ErrorResponse(404, "unknown dataset '" + dataset + "'");

  const std::string grammar_name = request.value("grammar", std::string("default"));
  grammar::Grammar grammar;
  if (!SafeName(grammar_name)) return ErrorResponse(404, "unknown grammar '" + grammar_name + "'");
  const fs::path grammar_path = impl_->options.workdir / "grammars" / (grammar_name + ".bnf");
  if (fs::is_regular_file(grammar_path)) {
    std::ifstream in(grammar_path);
    std::stringstream text;
    text << in.rdbuf();
    try {
      grammar = grammar::ParseGrammar(text.str());
    } catch (const Error& e) {
      return ErrorResponse(422, "grammar '" + grammar_name + "': " + e.what());
    }
  } else if (grammar_name == "default") {
    grammar = grammar::DefaultGrammar();
  } else {
    return ErrorResponse(404, "unknown grammar '" + grammar_name + "'");
  }

  engine::EngineConfig config;
  try {
    if (const auto it = request.find("config"); it != request.end()) it->get_to(config);
    config.Check();
  } catch (const std::exception& e) {
    return ErrorResponse(422, std::string("invalid config: ") + e.what());
  }

  std::optional<std::vector<double>> baseline;
  if (const auto it = request.find("baseline"); it != request.end() && !it->is_null()) {
    const fs::path rel = it->get<std::string>();
    fs::path path = impl_->options.workdir / rel;
    if (fs::is_directory(path)) path /= "result.json";
    if (rel.is_absolute() || !fs::is_regular_file(path)) {
      return ErrorResponse(404, "unknown baseline '" + rel.string() + "'");
    }
    try {
      std::ifstream in(path);
      baseline = experiment::ResultFromJson(Json::parse(in)).timeline;
    } catch (const std::exception& e) {
      return ErrorResponse(422, std::string("unreadable baseline: ") + e.what());
    }
  }

  std::shared_ptr<const experiment::Split> split;
  try {
    split = std::make_shared<const experiment::Split>(
        experiment::LoadDataset(dataset_path, config.seed));
  } catch (const Error& e) {
    return ErrorResponse(422, std::string("dataset: ") + e.what());
  }

  auto actor = std::make_shared<SessionActor>();
  {
    std::lock_guard lock(impl_->mu);
    std::ostringstream id;
    id << "s" << ++impl_->counter << "-" << std::hex << (impl_->id_rng() & 0xffffff);
    actor->id = id.str();
  }
  actor->dataset_name = dataset;
  actor->config = config;
  actor->created_at = UtcNow();
  actor->dir = impl_->options.workdir / "sessions" / actor->id;
  actor->baseline = std::move(baseline);
  actor->split = split;
  actor->initial_grammar = std::move(grammar);
  actor->eval_clock = impl_->options.eval_clock ? impl_->options.eval_clock() : nullptr;
  fs::create_directories(actor->dir);
  std::ofstream(actor->dir / "interactions.jsonl", std::ios::trunc);

  SessionActor* raw = actor.get();
  actor->Post([raw] {
    auto observer = std::make_shared<engine::JsonlRunLog>((raw->dir / "run.jsonl").string());
    raw->session.emplace(engine::Session::Start(
        raw->config, raw->initial_grammar,
        std::shared_ptr<const ml::Dataset>(raw->split, &raw->split->train), raw->eval_clock,
        observer));
    raw->Advance();
  });
  actor->thread = std::thread([raw] { raw->Loop(); });
  {
    std::lock_guard lock(impl_->mu);
    impl_->sessions[actor->id] = actor;
  }
  return {201,
          {{"session_id", actor->id},
           {"dataset_name", dataset},
           {"config", config},
           {"created_at", actor->created_at},
           {"status", "Running"}}};
}

Response Service::GetStatus(const std::string& id) {
  const auto actor = impl_->Find(id);
  if (!actor) return ErrorResponse(404, "unknown session '" + id + "'");
  std::lock_guard lock(actor->mu);
  Json body = {{"session_id", actor->id},
               {"dataset_name", actor->dataset_name},
               {"config", actor->config},
               {"created_at", actor->created_at},
               {"status", actor->status},
               {"generation", actor->generation},
               {"interactions_used", actor->interactions_used}};
  if (!actor->error.empty()) body["error"] = actor->error;
  return {200, body};
}

Response Service::GetSnapshot(const std::string& id,
                              const std::map<std::string, std::string>& query) {
  const auto actor = impl_->Find(id);
  if (!actor) return ErrorResponse(404, "unknown session '" + id + "'");
  std::shared_ptr<const interaction::InteractionSnapshot> snapshot;
  std::shared_ptr<const std::string> body;
  std::shared_ptr<const grammar::Grammar> grammar;
  {
    std::lock_guard lock(actor->mu);
    if (!actor->snapshot) {
      return ErrorResponse(409, "session is " + actor->status + ", not AwaitingFeedback");
    }
    snapshot = actor->snapshot;
    body = actor->snapshot_body;
    grammar = actor->grammar;
    if (!actor->snapshot_served_at) actor->snapshot_served_at = impl_->clock->Now();
  }
  const auto acc = query.find("t_acc");
  const auto time = query.find("t_time");
  if (acc == query.end() && time == query.end()) return {200, Json::parse(*body)};
  interaction::Thresholds th;
  try {
    if (acc != query.end()) th.t_acc = ParseThreshold(acc->second, "t_acc");
    if (time != query.end()) th.t_time = ParseThreshold(time->second, "t_time");
    return {200, Json(interaction::WithThresholds(*snapshot, th, *grammar))};
  } catch (const InvalidArgument& e) {
    return ErrorResponse(422, e.what());
  }
}

Response Service::PostFeedback(const std::string& id, const std::string& body) {
  const auto actor = impl_->Find(id);
  if (!actor) return ErrorResponse(404, "unknown session '" + id + "'");
  engine::Feedback feedback;
  try {
    Json::parse(body).get_to(feedback);
  } catch (const Json::exception& e) {
    return ErrorResponse(422, std::string("malformed feedback: ") + e.what());
  } catch (const InvalidArgument& e) {
    return ErrorResponse(422, std::string("malformed feedback: ") + e.what());
  }
  double served_at = 0.0;
  {
    std::lock_guard lock(actor->mu);
    if (!actor->snapshot) {
      return ErrorResponse(409, "session is " + actor->status + ", not AwaitingFeedback");
    }
    served_at = actor->snapshot_served_at.value_or(impl_->clock->Now());
  }
  const double wall = std::max(0.0, impl_->clock->Now() - served_at);

  auto promise = std::make_shared<std::promise<Response>>();
  auto future = promise->get_future();
  SessionActor* raw = actor.get();
  actor->Post([raw, feedback, wall, promise] {
    try {
      raw->session->ApplyFeedback(feedback, wall);
    } catch (const GrammarViolationError& e) {
      promise->set_value(ErrorResponse(422, e.what(), e.violations()));
      return;
    } catch (const StateError& e) {
      promise->set_value(ErrorResponse(409, e.what()));
      return;
    } catch (const InvalidArgument& e) {
      promise->set_value(ErrorResponse(422, e.what()));
      return;
    }
    const auto& record = raw->session->interactions().back();
    Json entry = Json(record);
    entry.erase("type");
    entry["session_id"] = raw->id;
    entry["interaction_index"] = raw->session->interactions_used() - 1;
    {
      std::ofstream out(raw->dir / "interactions.jsonl", std::ios::app);
      out << entry.dump() << '\n';
    }
    if (raw->session->status() == engine::Status::kFinished) {
      raw->Publish();
    } else {
      std::lock_guard lock(raw->mu);
      raw->snapshot.reset();
      raw->snapshot_body.reset();
      raw->status = std::string(engine::ToString(raw->session->status()));
      raw->interactions_used = raw->session->interactions_used();
    }
    promise->set_value({200,
                        {{"applied",
                          {{"remove_algorithms", record.removed_algorithms},
                           {"remove_hyperparameter_values",
                            record.removed_hyperparameter_values}}},
                         {"status", std::string(engine::ToString(raw->session->status()))}}});
    raw->Advance();
  });
  return future.get();
}

Response Service::GetResult(const std::string& id) {
  const auto actor = impl_->Find(id);
  if (!actor) return ErrorResponse(404, "unknown session '" + id + "'");
  std::lock_guard lock(actor->mu);
  if (!actor->result) return ErrorResponse(409, "session is " + actor->status + ", not Finished");
  return {200, *actor->result};
}

Response Service::GetTimeline(const std::string& id) {
  const auto actor = impl_->Find(id);
  if (!actor) return ErrorResponse(404, "unknown session '" + id + "'");
  std::lock_guard lock(actor->mu);
  Json series = Json::array();
  for (std::size_t g = 0; g < actor->timeline.size(); ++g) {
    Json point = {{"generation", g}, {"cumulative_eval_time", actor->timeline[g]}};
    if (actor->baseline && g < actor->baseline->size()) {
      point["baseline_cumulative_eval_time"] = (*actor->baseline)[g];
    }
    series.push_back(std::move(point));
  }
  return {200, {{"session_id", actor->id}, {"status", actor->status}, {"timeline", series}}};
}

namespace {

void Reply(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_header("Access-Control-Allow-Origin", "*");
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

int Service::Start(const std::string& host, int port) {
  auto& server = impl_->server;
  server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    Reply(res, CreateSession(req.body));
  });
  server.Get(R"(/sessions/([^/]+)/status)",
             [this](const httplib::Request& req, httplib::Response& res) {
               Reply(res, GetStatus(req.matches[1]));
             });
  server.Get(R"(/sessions/([^/]+)/snapshot)",
             [this](const httplib::Request& req, httplib::Response& res) {
               std::map<std::string, std::string> query;
               for (const auto& [k, v] : req.params) query[k] = v;
               const Response r = GetSnapshot(req.matches[1], query);
               if (r.status == 200 && query.empty()) {
                 // Serve the published bytes so repeated reads are identical.
                 res.status = 200;
                 res.set_header("Access-Control-Allow-Origin", "*");
                 res.set_content(r.body.dump(), "application/json");
                 return;
               }
               Reply(res, r);
             });
  server.Post(R"(/sessions/([^/]+)/feedback)",
              [this](const httplib::Request& req, httplib::Response& res) {
                Reply(res, PostFeedback(req.matches[1], req.body));
              });
  server.Get(R"(/sessions/([^/]+)/result)",
             [this](const httplib::Request& req, httplib::Response& res) {
               Reply(res, GetResult(req.matches[1]));
             });
  server.Get(R"(/sessions/([^/]+)/timeline)",
             [this](const httplib::Request& req, httplib::Response& res) {
               Reply(res, GetTimeline(req.matches[1]));
             });
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw InvalidArgument("cannot bind " + host + ":" + std::to_string(port));
  impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  return bound;
}

void Service::Serve(const std::string& host, int port) {
  Start(host, port);
  Wait();
}

void Service::Wait() {
  if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

void Service::Stop() { impl_->server.stop(); }

}  // namespace evoflow::service
