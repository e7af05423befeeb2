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

#include "aotk/io.h"

#include <openssl/sha.h>

#include <cstdio>
#include <sstream>
#include <system_error>

#include "absl/strings/str_cat.h"
#include "aotk/status.h"
#include "aotk/text.h"

namespace aotk {

namespace fs = std::filesystem;

absl::Status ForEachJsonLine(
    const fs::path& path,
    const std::function<absl::Status(size_t line, const Json& record)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return DataError(absl::StrCat("cannot open ", path.string()));
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    Json record = Json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded()) {
      return DataError(absl::StrCat(path.string(), ":", line_no,
                                    ": malformed JSON record"));
    }
    AOTK_RETURN_IF_ERROR(fn(line_no, record));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return DataError(absl::StrCat("cannot open ", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status WriteFileAtomically(const fs::path& path,
                                 std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return DataError(absl::StrCat("cannot write ", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) return DataError(absl::StrCat("write failed: ", tmp.string()));
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    return DataError(absl::StrCat("cannot rename into ", path.string(), ": ",
                                  ec.message()));
  }
  return absl::OkStatus();
}

absl::Status WriteJsonLines(const fs::path& path,
                            const std::vector<Json>& records) {
  std::string contents;
  for (const Json& record : records) {
    contents += record.dump();
    contents += '\n';
  }
  return WriteFileAtomically(path, contents);
}

absl::StatusOr<JsonlAppender> JsonlAppender::Open(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) return DataError(absl::StrCat("cannot append to ", path.string()));
  return JsonlAppender(path, std::move(out));
}

absl::Status JsonlAppender::Append(const Json& record) {
  const std::string line = record.dump() + "\n";
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) return DataError(absl::StrCat("append failed: ", path_.string()));
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Json>> RecoverJsonLines(const fs::path& path) {
  std::vector<Json> records;
  if (!fs::exists(path)) return records;
  AOTK_ASSIGN_OR_RETURN(std::string contents, ReadFile(path));
  size_t pos = 0;
  size_t line_no = 0;
  size_t good_end = 0;
  while (pos < contents.size()) {
    ++line_no;
    const size_t nl = contents.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const size_t end = complete ? nl : contents.size();
    std::string_view line(contents.data() + pos, end - pos);
    if (!IsBlank(line)) {
      Json record = Json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (record.is_discarded() || !complete) {
        if (complete && end + 1 < contents.size()) {
          return DataError(absl::StrCat(path.string(), ":", line_no,
                                        ": malformed JSON record"));
        }
        break;
      }
      records.push_back(std::move(record));
    }
    good_end = complete ? end + 1 : end;
    pos = good_end;
  }
  if (good_end < contents.size()) {
    std::error_code ec;
    fs::resize_file(path, good_end, ec);
    if (ec) {
      return DataError(absl::StrCat("cannot truncate torn record in ",
                                    path.string(), ": ", ec.message()));
    }
  }
  return records;
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(),
         digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char b : digest) {
    out += kHex[b >> 4];
    out += kHex[b & 0xF];
  }
  return out;
}

absl::StatusOr<std::string> Sha256HexOfFile(const fs::path& path) {
  AOTK_ASSIGN_OR_RETURN(std::string contents, ReadFile(path));
  return Sha256Hex(contents);
}

}  // namespace aotk
