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

#ifndef AOTK_IO_H_
#define AOTK_IO_H_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"

namespace aotk {

using Json = nlohmann::json;

// Calls `fn` for every non-blank line of a JSONL file with its 1-based line
// number. Unparseable lines fail with a data error naming the line.
absl::Status ForEachJsonLine(
    const std::filesystem::path& path,
    const std::function<absl::Status(size_t line, const Json& record)>& fn);

// Writes all records, one compact JSON object per line, via a temporary file
// renamed into place.
absl::Status WriteJsonLines(const std::filesystem::path& path,
                            const std::vector<Json>& records);

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);
absl::Status WriteFileAtomically(const std::filesystem::path& path,
                                 std::string_view contents);

// Append-only JSONL sink; every record is flushed before Append returns.
class JsonlAppender {
 public:
  static absl::StatusOr<JsonlAppender> Open(const std::filesystem::path& path);

  absl::Status Append(const Json& record);

 private:
  explicit JsonlAppender(std::filesystem::path path, std::ofstream out)
      : path_(std::move(path)), out_(std::move(out)) {}

  std::filesystem::path path_;
  std::ofstream out_;
};

// Reads an append-only JSONL file written by JsonlAppender. A torn final line
// (no trailing newline, or unparseable) is cut off the file and ignored, every
// other malformed line is an error.
absl::StatusOr<std::vector<Json>> RecoverJsonLines(
    const std::filesystem::path& path);

std::string Sha256Hex(std::string_view data);
absl::StatusOr<std::string> Sha256HexOfFile(const std::filesystem::path& path);

}  // namespace aotk

#endif  // AOTK_IO_H_
