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

#include "aotk/http.h"

#include "httplib.h"

#include <thread>

#include "absl/strings/str_cat.h"
#include "aotk/status.h"

namespace aotk {

absl::StatusOr<Json> PostJson(
    const std::string& base_url, const std::string& path, const Json& body,
    const std::vector<std::pair<std::string, std::string>>& headers,
    std::chrono::seconds timeout) {
  httplib::Client client(base_url);
  if (!client.is_valid()) {
    return ConfigError(absl::StrCat("invalid endpoint URL '", base_url, "'"));
  }
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(path, h, body.dump(), "application/json");
  if (!res) {
    return RemoteUnavailableError(absl::StrCat(
        "POST ", base_url, path, " failed: ", httplib::to_string(res.error())));
  }
  if (res->status == 429 || res->status >= 500) {
    return RemoteUnavailableError(absl::StrCat("POST ", base_url, path,
                                               " returned HTTP ", res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    return RemoteError(absl::StrCat("POST ", base_url, path, " returned HTTP ",
                                    res->status, ": ",
                                    res->body.substr(0, 200)));
  }
  Json reply = Json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (reply.is_discarded()) {
    return RemoteError(
        absl::StrCat("POST ", base_url, path, " returned non-JSON body"));
  }
  return reply;
}

bool IsTransient(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kDeadlineExceeded:
    case absl::StatusCode::kResourceExhausted:
      return true;
    default:
      return false;
  }
}

void SleepFor(std::chrono::milliseconds duration) {
  std::this_thread::sleep_for(duration);
}

absl::Status RetriesExhausted(int attempts, const absl::Status& last) {
  return RemoteError(absl::StrCat("giving up after ", attempts,
                                  " attempts: ", last.message()));
}

}  // namespace aotk
