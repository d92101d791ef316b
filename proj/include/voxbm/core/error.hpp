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

#include <stdexcept>
#include <string>
#include <string_view>

namespace voxbm {

// Every failure the library reports carries one of these codes. The gateway
// maps them onto HTTP status codes and snake_case error identifiers.
enum class ErrorCode {
  kEmptyInput,
  kTooShort,
  kBadLength,
  kSilentFrame,
  kIllConditioned,
  kNoVoicedRegion,
  kTooFewPeriods,
  kDegenerateCycle,
  kFormantsUnresolved,
  kTooFewSyllables,
  kSilentInput,
  kEmptyCorpus,
  kBadConfig,
  kShapeError,
  kEmptyDataset,
  kFormatError,
  kVersionError,
  kMissingClass,
  kSchemaError,
  kBadSpace,
  kNoSuccessfulTrial,
  kEmptyAfterClean,
  kSplitImpossible,
  kInsufficientData,
  kStorageError,
  kUnknownSession,
  kUnknownTask,
  kBadAudioFormat,
  kTaskAlreadyAccepted,
  kIncompleteSession,
  kModelMissing,
  kInvalidArgument,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kTooShort: return "too_short";
    case ErrorCode::kBadLength: return "bad_length";
    case ErrorCode::kSilentFrame: return "silent_frame";
    case ErrorCode::kIllConditioned: return "ill_conditioned";
    case ErrorCode::kNoVoicedRegion: return "no_voiced_region";
    case ErrorCode::kTooFewPeriods: return "too_few_periods";
    case ErrorCode::kDegenerateCycle: return "degenerate_cycle";
    case ErrorCode::kFormantsUnresolved: return "formants_unresolved";
    case ErrorCode::kTooFewSyllables: return "too_few_syllables";
    case ErrorCode::kSilentInput: return "silent_input";
    case ErrorCode::kEmptyCorpus: return "empty_corpus";
    case ErrorCode::kBadConfig: return "bad_config";
    case ErrorCode::kShapeError: return "shape_error";
    case ErrorCode::kEmptyDataset: return "empty_dataset";
    case ErrorCode::kFormatError: return "format_error";
    case ErrorCode::kVersionError: return "version_error";
    case ErrorCode::kMissingClass: return "missing_class";
    case ErrorCode::kSchemaError: return "schema_error";
    case ErrorCode::kBadSpace: return "bad_space";
    case ErrorCode::kNoSuccessfulTrial: return "no_successful_trial";
    case ErrorCode::kEmptyAfterClean: return "empty_after_clean";
    case ErrorCode::kSplitImpossible: return "split_impossible";
    case ErrorCode::kInsufficientData: return "insufficient_data";
    case ErrorCode::kStorageError: return "storage_error";
    case ErrorCode::kUnknownSession: return "unknown_session";
    case ErrorCode::kUnknownTask: return "unknown_task";
    case ErrorCode::kBadAudioFormat: return "bad_audio_format";
    case ErrorCode::kTaskAlreadyAccepted: return "task_already_accepted";
    case ErrorCode::kIncompleteSession: return "incomplete_session";
    case ErrorCode::kModelMissing: return "model_missing";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace voxbm
