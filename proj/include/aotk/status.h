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

#ifndef AOTK_STATUS_H_
#define AOTK_STATUS_H_

#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace aotk {

// Coarse error classes surfaced to the command line as exit codes.
enum class ErrorCategory {
  kConfig = 2,
  kData = 3,
  kBackend = 4,
  kRemote = 5,
};

std::string_view ErrorCategoryName(ErrorCategory category);

// Status constructors that tag the error with its category. Argument errors
// from library calls are config-class errors.
absl::Status ArgumentError(std::string_view message);
absl::Status ConfigError(std::string_view message);
absl::Status DataError(std::string_view message);
absl::Status BackendError(std::string_view message);
// Transient remote failure; eligible for retry.
absl::Status RemoteUnavailableError(std::string_view message);
// Permanent remote failure (bad response, exhausted retries).
absl::Status RemoteError(std::string_view message);

// Category attached by the constructors above, otherwise inferred from the
// status code.
ErrorCategory CategoryOf(const absl::Status& status);

// Returns `status` with `context` prepended to its message, keeping code and
// payloads.
absl::Status Annotate(const absl::Status& status, std::string_view context);

// Exit code for the command line: 0 for OK, otherwise the category value.
int ExitCodeFor(const absl::Status& status);

}  // namespace aotk

#define AOTK_STATUS_CONCAT_INNER_(a, b) a##b
#define AOTK_STATUS_CONCAT_(a, b) AOTK_STATUS_CONCAT_INNER_(a, b)

#define AOTK_RETURN_IF_ERROR(expr)                  \
  do {                                              \
    ::absl::Status aotk_status_ = (expr);           \
    if (!aotk_status_.ok()) return aotk_status_;    \
  } while (false)

#define AOTK_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, expr) \
  auto tmp = (expr);                                \
  if (!tmp.ok()) return tmp.status();               \
  lhs = std::move(*tmp)

#define AOTK_ASSIGN_OR_RETURN(lhs, expr) \
  AOTK_ASSIGN_OR_RETURN_IMPL_(           \
      AOTK_STATUS_CONCAT_(aotk_statusor_, __LINE__), lhs, expr)

#endif  // AOTK_STATUS_H_
