// Copyright 2026 The AOTK Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aotk/status.h"

#include <optional>
#include <string>

#include "absl/strings/cord.h"

namespace aotk {
namespace {

constexpr char kCategoryPayloadUrl[] = "aotk/error-category";

absl::Status Tagged(absl::StatusCode code, std::string_view message,
                    ErrorCategory category) {
  absl::Status status(code, std::string(message));
  status.SetPayload(kCategoryPayloadUrl,
                    absl::Cord(std::string(ErrorCategoryName(category))));
  return status;
}

std::optional<ErrorCategory> ParseCategory(const std::string& name) {
  for (ErrorCategory c : {ErrorCategory::kConfig, ErrorCategory::kData,
                          ErrorCategory::kBackend, ErrorCategory::kRemote}) {
    if (name == ErrorCategoryName(c)) return c;
  }
  return std::nullopt;
}

}  // namespace

std::string_view ErrorCategoryName(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kConfig:
      return "config";
    case ErrorCategory::kData:
      return "data";
    case ErrorCategory::kBackend:
      return "backend";
    case ErrorCategory::kRemote:
      return "remote";
  }
  return "unknown";
}

absl::Status ArgumentError(std::string_view message) {
  return Tagged(absl::StatusCode::kInvalidArgument, message,
                ErrorCategory::kConfig);
}

absl::Status ConfigError(std::string_view message) {
  return Tagged(absl::StatusCode::kInvalidArgument, message,
                ErrorCategory::kConfig);
}

absl::Status DataError(std::string_view message) {
  return Tagged(absl::StatusCode::kDataLoss, message, ErrorCategory::kData);
}

absl::Status BackendError(std::string_view message) {
  return Tagged(absl::StatusCode::kInternal, message, ErrorCategory::kBackend);
}

absl::Status RemoteUnavailableError(std::string_view message) {
  return Tagged(absl::StatusCode::kUnavailable, message,
                ErrorCategory::kRemote);
}

absl::Status RemoteError(std::string_view message) {
  return Tagged(absl::StatusCode::kUnknown, message, ErrorCategory::kRemote);
}

ErrorCategory CategoryOf(const absl::Status& status) {
  if (auto payload = status.GetPayload(kCategoryPayloadUrl)) {
    if (auto c = ParseCategory(std::string(*payload))) return *c;
  }
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
      return ErrorCategory::kConfig;
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kDataLoss:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kAlreadyExists:
      return ErrorCategory::kData;
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kDeadlineExceeded:
    case absl::StatusCode::kResourceExhausted:
    case absl::StatusCode::kUnauthenticated:
    case absl::StatusCode::kPermissionDenied:
      return ErrorCategory::kRemote;
    default:
      return ErrorCategory::kBackend;
  }
}

absl::Status Annotate(const absl::Status& status, std::string_view context) {
  if (status.ok()) return status;
  absl::Status annotated(
      status.code(),
      std::string(context) + ": " + std::string(status.message()));
  status.ForEachPayload(
      [&](absl::string_view url, const absl::Cord& payload) {
        annotated.SetPayload(url, payload);
      });
  return annotated;
}

int ExitCodeFor(const absl::Status& status) {
  if (status.ok()) return 0;
  return static_cast<int>(CategoryOf(status));
}

}  // namespace aotk
