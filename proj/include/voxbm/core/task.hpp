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

// The eight recording tasks of the voice protocol.

#include <array>
#include <string>
#include <string_view>

#include "voxbm/core/error.hpp"

namespace voxbm {

enum class TaskCode { kTask1 = 1, kTask2, kTask3, kTask4, kTask5, kTask6, kTask7, kTask8 };

struct TaskInfo {
  TaskCode code;
  std::string_view name;
  std::string_view title;
  std::string_view instructions;
};

inline constexpr std::array<TaskInfo, 8> kTasks = {{
    {TaskCode::kTask1, "TASK1", "Sustained phonation of /i/",
     "At a comfortable pitch and loudness, as constant and long as possible, at least 5 s."},
    {TaskCode::kTask2, "TASK2", "Rapid syllable repetition",
     "Steady repetition of /pa/-/ta/-/ka/ syllables, repeated at least 5 times on one breath."},
    {TaskCode::kTask3, "TASK3", "Sustained vowels /a/, /i/, /u/",
     "Approximately 5-second sustained vowels at a comfortable pitch and loudness."},
    {TaskCode::kTask4, "TASK4", "Sentence reading", "Reading a phonemically balanced text of 136 words."},
    {TaskCode::kTask5, "TASK5", "Monologue",
     "Speaking for approximately 90 s about a familiar topic (e.g., recent events, interests)."},
    {TaskCode::kTask6, "TASK6", "Stress pattern reading",
     "Reading the same text containing 8 variable sentences of 71 words with varied stress patterns."},
    {TaskCode::kTask7, "TASK7", "Emotional sentence reading",
     "Reading 10 sentences with specific emotions in a neutral tone, covering various emotional states."},
    {TaskCode::kTask8, "TASK8", "Rhymed text reading",
     "Reading rhymes of 34 words following the example set by the examiner."},
}};

inline const TaskInfo& task_info(TaskCode code) { return kTasks[static_cast<std::size_t>(code) - 1]; }

inline std::string task_name(TaskCode code) { return std::string(task_info(code).name); }

inline TaskCode parse_task(std::string_view text) {
  for (const auto& t : kTasks) {
    if (t.name == text) return t.code;
  }
  fail(ErrorCode::kUnknownTask, "unknown task code '" + std::string(text) + "'");
}

}  // namespace voxbm
