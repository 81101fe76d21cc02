// Copyright 2026 The LDEB Authors.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ldeb {

enum class ErrorKind {
  // data errors
  EmptyDialogue,
  BadLabel,
  LineCountMismatch,
  LengthMismatch,
  EmptyLabelList,
  OutOfRange,
  EmptyCorpus,
  AlignmentError,
  EmptySplitSet,
  TooFewRows,
  BadFormat,
  // learner / model errors
  EmptyNode,
  OneClassTraining,
  NonFiniteLoss,
  ShapeMismatch,
  UntrainedLevel,
  ModelFormat,
  // configuration and environment
  Config,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyDialogue: return "EmptyDialogue";
    case ErrorKind::BadLabel: return "BadLabel";
    case ErrorKind::LineCountMismatch: return "LineCountMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyLabelList: return "EmptyLabelList";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::AlignmentError: return "AlignmentError";
    case ErrorKind::EmptySplitSet: return "EmptySplitSet";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::BadFormat: return "BadFormat";
    case ErrorKind::EmptyNode: return "EmptyNode";
    case ErrorKind::OneClassTraining: return "OneClassTraining";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::UntrainedLevel: return "UntrainedLevel";
    case ErrorKind::ModelFormat: return "ModelFormat";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Process exit code the CLI uses for each error kind:
/// 2 config error, 3 data error, 4 model error.
constexpr int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Io:
      return 2;
    case ErrorKind::EmptyNode:
    case ErrorKind::OneClassTraining:
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::UntrainedLevel:
    case ErrorKind::ModelFormat:
      return 4;
    default:
      return 3;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ldeb
