/*
 * Copyright 2026 The voxbm Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Session records and the per-task state machine:
//   pending -> recorded -> accepted | failed,  failed -> pending.
// Every transition is appended to the task's log so the history can be
// audited after the fact.

#include <chrono>
#include <ctime>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "voxbm/core/error.hpp"
#include "voxbm/core/task.hpp"

namespace voxbm::gateway {

inline constexpr int kGatewaySchemaVersion = 1;

/// Error carrying structured details for the HTTP error body.
class GatewayError : public Error {
 public:
  GatewayError(ErrorCode code, const std::string& message, nlohmann::json details)
      : Error(code, message), details_(std::move(details)) {}
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  nlohmann::json details_;
};

enum class TaskState { kPending, kRecorded, kAccepted, kFailed };

inline std::string state_name(TaskState s) {
  switch (s) {
    case TaskState::kPending: return "pending";
    case TaskState::kRecorded: return "recorded";
    case TaskState::kAccepted: return "accepted";
    case TaskState::kFailed: return "failed";
  }
  return "pending";
}

inline TaskState parse_state(const std::string& s) {
  if (s == "pending") return TaskState::kPending;
  if (s == "recorded") return TaskState::kRecorded;
  if (s == "accepted") return TaskState::kAccepted;
  if (s == "failed") return TaskState::kFailed;
  fail(ErrorCode::kFormatError, "unknown task state '" + s + "'");
}

inline bool transition_allowed(TaskState from, TaskState to) {
  switch (from) {
    case TaskState::kPending: return to == TaskState::kRecorded;
    case TaskState::kRecorded: return to == TaskState::kAccepted || to == TaskState::kFailed;
    case TaskState::kFailed: return to == TaskState::kPending;
    case TaskState::kAccepted: return false;
  }
  return false;
}

struct ProtocolTask {
  TaskCode code = TaskCode::kTask1;
  double min_duration_s = 0.0;
  std::string script;
};

/// Sustained /i/, syllable repetition, sustained vowels and a monologue:
/// 5 + 10 + 15 + 90 s of minimum recording time.
inline std::vector<ProtocolTask> default_protocol() {
  const auto make = [](TaskCode c, double min_s) {
    return ProtocolTask{c, min_s, std::string(task_info(c).instructions)};
  };
  return {make(TaskCode::kTask1, 5.0), make(TaskCode::kTask2, 10.0), make(TaskCode::kTask3, 15.0),
          make(TaskCode::kTask5, 90.0)};
}

struct SubjectMetadata {
  std::optional<std::string> age_band;
  std::optional<std::string> sex;
};

struct TaskStatus {
  TaskState state = TaskState::kPending;
  int attempts = 0;
  std::vector<std::string> reasons;  // QC reasons of the latest failed attempt
  std::vector<std::pair<TaskState, TaskState>> transitions;
};

struct Session {
  std::string session_id;
  std::string created_at;
  SubjectMetadata subject;
  std::vector<ProtocolTask> protocol;
  std::map<TaskCode, TaskStatus> tasks;
  bool finalized = false;

  const ProtocolTask* find_task(TaskCode c) const {
    for (const auto& t : protocol) {
      if (t.code == c) return &t;
    }
    return nullptr;
  }

  void move(TaskCode c, TaskState to) {
    auto& t = tasks.at(c);
    require(transition_allowed(t.state, to), ErrorCode::kInvalidArgument,
            "illegal transition " + state_name(t.state) + " -> " + state_name(to));
    t.transitions.emplace_back(t.state, to);
    t.state = to;
  }

  std::vector<std::string> unaccepted() const {
    std::vector<std::string> out;
    for (const auto& p : protocol) {
      if (tasks.at(p.code).state != TaskState::kAccepted) out.push_back(task_name(p.code));
    }
    return out;
  }
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json session_to_json(const Session& s) {
  nlohmann::json protocol = nlohmann::json::array();
  for (const auto& p : s.protocol) {
    protocol.push_back({{"task_code", task_name(p.code)}, {"min_duration_s", p.min_duration_s}, {"script", p.script}});
  }
  nlohmann::json tasks = nlohmann::json::object();
  for (const auto& [code, t] : s.tasks) {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& [a, b] : t.transitions) tr.push_back({state_name(a), state_name(b)});
    tasks[task_name(code)] = {
        {"state", state_name(t.state)}, {"attempts", t.attempts}, {"reasons", t.reasons}, {"transitions", tr}};
  }
  nlohmann::json subject = nlohmann::json::object();
  if (s.subject.age_band) subject["age_band"] = *s.subject.age_band;
  if (s.subject.sex) subject["sex"] = *s.subject.sex;
  return {{"schema_version", kGatewaySchemaVersion},
          {"session_id", s.session_id},
          {"created_at", s.created_at},
          {"subject", subject},
          {"protocol", protocol},
          {"tasks", tasks},
          {"finalized", s.finalized}};
}

inline Session session_from_json(const nlohmann::json& j) {
  try {
    require(j.at("schema_version").get<int>() == kGatewaySchemaVersion, ErrorCode::kVersionError,
            "unsupported session schema version");
    Session s;
    s.session_id = j.at("session_id").get<std::string>();
    s.created_at = j.at("created_at").get<std::string>();
    const auto& subj = j.at("subject");
    if (subj.contains("age_band")) s.subject.age_band = subj["age_band"].get<std::string>();
    if (subj.contains("sex")) s.subject.sex = subj["sex"].get<std::string>();
    for (const auto& p : j.at("protocol")) {
      s.protocol.push_back({parse_task(p.at("task_code").get<std::string>()), p.at("min_duration_s").get<double>(),
                            p.at("script").get<std::string>()});
    }
    for (const auto& [name, t] : j.at("tasks").items()) {
      TaskStatus st;
      st.state = parse_state(t.at("state").get<std::string>());
      st.attempts = t.at("attempts").get<int>();
      st.reasons = t.at("reasons").get<std::vector<std::string>>();
      for (const auto& pair : t.at("transitions")) {
        st.transitions.emplace_back(parse_state(pair.at(0).get<std::string>()), parse_state(pair.at(1).get<std::string>()));
      }
      s.tasks[parse_task(name)] = std::move(st);
    }
    s.finalized = j.at("finalized").get<bool>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kStorageError, std::string("corrupt session record: ") + e.what());
  }
}

}  // namespace voxbm::gateway
