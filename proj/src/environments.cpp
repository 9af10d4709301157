// Copyright 2026 The groundsim Authors
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

#include "groundsim/error.hpp"
#include "groundsim/harness.hpp"
#include "groundsim/jsonl.hpp"

#include <fmt/format.h>

#include <cerrno>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <set>

#include <sys/wait.h>
#include <unistd.h>

namespace groundsim {

namespace {

struct MockReservation {
  std::string id;
  std::string route;
  std::string cabin;
  bool refundable = false;
  bool delayed = false;
};

struct MockTask {
  std::string user_id;
  std::vector<MockReservation> reservations;
};

const std::map<std::string, MockTask>& mock_catalog() {
  static const std::map<std::string, MockTask> catalog{
      {"42",
       {"omar_rossi_1241",
        {{"FDZ0T5", "JFK-ORD", "economy", true, false},
         {"HSR97W", "ORD-JFK", "economy", true, false},
         {"K9LM2P", "JFK-MIA", "economy", true, false},
         {"QW3RT7", "MIA-JFK", "economy", true, false}}}},
      {"27", {"sofia_kim_5812", {{"K7PQ2X", "SEA-DEN", "economy", true, true}}}},
      {"47", {"liam_chen_9033", {{"ZR4M8N", "BOS-LAX", "basic_economy", false, false}}}},
  };
  return catalog;
}

class MockAirlineEnvironment : public TaskEnvironment {
 public:
  std::string reset(const EvalTask& task) override {
    auto it = mock_catalog().find(task.task_id);
    if (it == mock_catalog().end()) throw EnvironmentError("mock airline has no task " + task.task_id);
    task_id_ = task.task_id;
    state_ = it->second;
    cancelled_.clear();
    refunded_.clear();
    certificates_.clear();
    return "Airline support desk. Policy: basic economy fares are non-refundable; delayed flights qualify for a "
           "$150 travel certificate.";
  }

  std::string step(const ToolCall& call) override {
    if (task_id_.empty()) throw EnvironmentError("step before reset");
    auto arg = [&](const char* key) { return call.arguments.value(key, std::string()); };
    if (call.name == "list_reservations") {
      if (arg("user_id") != state_.user_id) return "error: user not found";
      json out = json::array();
      for (const auto& r : state_.reservations) {
        out.push_back({{"reservation_id", r.id},
                       {"route", r.route},
                       {"cabin", r.cabin},
                       {"status", cancelled_.count(r.id) ? "cancelled" : "active"},
                       {"delayed", r.delayed}});
      }
      return out.dump();
    }
    const MockReservation* res = find(arg("reservation_id"));
    if (call.name == "cancel_reservation") {
      if (!res) return "error: reservation not found";
      if (cancelled_.count(res->id)) return "error: reservation already cancelled";
      cancelled_.insert(res->id);
      return "reservation " + res->id + " cancelled";
    }
    if (call.name == "refund") {
      if (!res) return "error: reservation not found";
      if (!res->refundable) return "error: basic economy fares are non-refundable";
      refunded_.insert(res->id);
      return "refund issued for " + res->id;
    }
    if (call.name == "issue_certificate") {
      if (arg("user_id") != state_.user_id) return "error: user not found";
      const int amount = call.arguments.value("amount", 0);
      if (amount <= 0) return "error: amount must be positive";
      certificates_.push_back(amount);
      return fmt::format("certificate of ${} issued to {}", amount, state_.user_id);
    }
    return "error: unknown tool " + call.name;
  }

  bool is_success() const override {
    if (task_id_ == "42") {
      return cancelled_ == std::set<std::string>{"FDZ0T5", "HSR97W"} && refunded_.empty() && certificates_.empty();
    }
    if (task_id_ == "27") return certificates_ == std::vector<int>{150} && cancelled_.empty() && refunded_.empty();
    if (task_id_ == "47") return cancelled_.empty() && refunded_.empty();
    return false;
  }

  std::string tool_manifest() const override {
    return "- list_reservations {\"user_id\": str}: reservations of a user\n"
           "- cancel_reservation {\"reservation_id\": str}\n"
           "- refund {\"reservation_id\": str}\n"
           "- issue_certificate {\"user_id\": str, \"amount\": int}";
  }

 private:
  const MockReservation* find(const std::string& id) const {
    for (const auto& r : state_.reservations) {
      if (r.id == id) return &r;
    }
    return nullptr;
  }

  std::string task_id_;
  MockTask state_;
  std::set<std::string> cancelled_;
  std::set<std::string> refunded_;
  std::vector<int> certificates_;
};

// One child process per environment instance, driven line by line.
class ProcessEnvironment : public TaskEnvironment {
 public:
  explicit ProcessEnvironment(std::string command) : command_(std::move(command)) {}
  ~ProcessEnvironment() override { stop(); }

  std::string reset(const EvalTask& task) override {
    stop();
    start();
    auto reply = call({{"op", "reset"}, {"task", to_json(task)}});
    manifest_ = reply.value("tools", std::string());
    return reply.value("observation", std::string());
  }

  std::string step(const ToolCall& c) override {
    return call({{"op", "step"}, {"name", c.name}, {"arguments", c.arguments}}).value("observation", std::string());
  }

  bool is_success() const override {
    auto reply = const_cast<ProcessEnvironment*>(this)->call({{"op", "is_success"}});
    if (!reply.contains("success") || !reply["success"].is_boolean()) throw EnvironmentError("adapter sent no success flag");
    return reply["success"].get<bool>();
  }

  std::string tool_manifest() const override { return manifest_; }

 private:
  void start() {
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw EnvironmentError("pipe failed");
    pid_ = fork();
    if (pid_ < 0) throw EnvironmentError("fork failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[1]);
      close(from_child[0]);
      execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    out_ = fdopen(to_child[1], "w");
    in_ = fdopen(from_child[0], "r");
    if (!out_ || !in_) throw EnvironmentError("fdopen failed");
  }

  void stop() {
    if (out_) fclose(out_);
    if (in_) fclose(in_);
    out_ = in_ = nullptr;
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  json call(const json& request) {
    if (!out_) throw EnvironmentError("adapter not started; call reset first");
    const auto line = request.dump() + "\n";
    if (std::fputs(line.c_str(), out_) < 0 || std::fflush(out_) != 0) throw EnvironmentError("adapter closed its input");
    std::string reply;
    int ch;
    while ((ch = std::fgetc(in_)) != EOF && ch != '\n') reply.push_back(static_cast<char>(ch));
    if (reply.empty() && ch == EOF) throw EnvironmentError("adapter exited without replying");
    auto j = json::parse(reply, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw EnvironmentError("adapter reply is not a JSON object: " + reply);
    if (j.contains("error")) throw EnvironmentError("adapter error: " + j["error"].dump());
    return j;
  }

  std::string command_;
  std::string manifest_;
  pid_t pid_ = -1;
  FILE* out_ = nullptr;
  FILE* in_ = nullptr;
};

}  // namespace

std::unique_ptr<TaskEnvironment> make_mock_airline_environment() { return std::make_unique<MockAirlineEnvironment>(); }

std::vector<EvalTask> mock_airline_tasks() {
  auto task = [](std::string id, std::string scenario, std::vector<std::string> names) {
    EvalTask t;
    t.task_id = std::move(id);
    t.domain = TaskDomain::airline;
    t.raw_scenario = std::move(scenario);
    t.declared_names = std::move(names);
    return t;
  };
  return {
      task("42",
           "Your user id is omar_rossi_1241. You want to cancel reservations FDZ0T5 and HSR97W. Do not modify the "
           "other reservations. You are impatient and reactive, and you only answer what is directly asked.",
           {}),
      task("27",
           "Your user id is sofia_kim_5812. You want compensation for the delayed flight on reservation K7PQ2X. You "
           "are extremely distraught and keep mentioning how upset you are.",
           {}),
      task("47",
           "Your user id is liam_chen_9033. You want a full refund for reservation ZR4M8N. If the agent says a refund "
           "is not possible, insist on the refund up to 5 times, then give up without cancelling. Be insistent and "
           "express frustration.",
           {}),
  };
}

std::unique_ptr<TaskEnvironment> make_process_environment(const std::string& command) {
  // A dead adapter must surface as EnvironmentError, not kill the harness.
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
  return std::make_unique<ProcessEnvironment>(command);
}

EnvironmentFactory environment_factory(const std::string& spec) {
  if (spec == "mock") return [] { return make_mock_airline_environment(); };
  const std::string prefix = "adapter:";
  if (spec.rfind(prefix, 0) == 0 && spec.size() > prefix.size()) {
    const auto command = spec.substr(prefix.size());
    return [command] { return make_process_environment(command); };
  }
  throw InvalidRequest("unknown environment '" + spec + "' (use mock or adapter:<path>)");
}

}  // namespace groundsim
