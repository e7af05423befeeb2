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

#ifndef AOTK_HTTP_H_
#define AOTK_HTTP_H_

#include <chrono>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "aotk/io.h"

namespace aotk {

// POSTs a JSON body to `base_url` + `path` and parses the JSON reply.
// Connection failures, 429 and 5xx map to RemoteUnavailableError (retryable);
// other non-2xx replies and unparseable bodies map to RemoteError.
absl::StatusOr<Json> PostJson(
    const std::string& base_url, const std::string& path, const Json& body,
    const std::vector<std::pair<std::string, std::string>>& headers,
    std::chrono::seconds timeout);

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{1000};
  double backoff_multiplier = 2.0;
  // Replaceable for tests.
  std::function<void(std::chrono::milliseconds)> sleep;
};

bool IsTransient(const absl::Status& status);
void SleepFor(std::chrono::milliseconds duration);
absl::Status RetriesExhausted(int attempts, const absl::Status& last);

// Runs `attempt` until it succeeds, fails permanently, or the attempts run out.
// Backoff grows geometrically after each transient failure.
template <typename T>
absl::StatusOr<T> WithRetries(
    const RetryPolicy& policy,
    const std::function<absl::StatusOr<T>()>& attempt) {
  std::chrono::milliseconds backoff = policy.initial_backoff;
  absl::Status last;
  const int attempts = policy.max_attempts < 1 ? 1 : policy.max_attempts;
  for (int i = 0; i < attempts; ++i) {
    absl::StatusOr<T> result = attempt();
    if (result.ok() || !IsTransient(result.status())) return result;
    last = result.status();
    if (i + 1 < attempts) {
      if (policy.sleep) {
        policy.sleep(backoff);
      } else {
        SleepFor(backoff);
      }
      backoff = std::chrono::milliseconds(static_cast<int64_t>(
          static_cast<double>(backoff.count()) * policy.backoff_multiplier));
    }
  }
  return RetriesExhausted(attempts, last);
}

}  // namespace aotk

#endif  // AOTK_HTTP_H_
