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

// A run directory under <output_root>/<run_id>: an exclusive lock, and a
// manifest written before any artifact that records the config snapshot and,
// per completed step, its inputs and artifact checksums.

#ifndef AOTK_TOOLS_RUN_DIR_H_
#define AOTK_TOOLS_RUN_DIR_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "aotk/io.h"

namespace aotk::cli {

inline constexpr char kToolVersion[] = "0.1.0";

// Checksums of files, keyed by path relative to the run directory when inside
// it, absolute otherwise.
using Checksums = std::map<std::string, std::string>;

class RunDirectory {
 public:
  // Creates the directory and manifest on first use. An existing manifest
  // must carry the same config (ignoring `ignored_keys`), else config error.
  // Fails if a live process holds the lock; a lock left by a dead process is
  // taken over.
  static absl::StatusOr<RunDirectory> Open(
      const std::filesystem::path& root, const std::string& run_id,
      const Json& config, const std::vector<std::string>& ignored_keys);

  RunDirectory(RunDirectory&& other) noexcept;
  RunDirectory& operator=(RunDirectory&&) = delete;
  ~RunDirectory();

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const {
    return path_ / rel;
  }
  const Json& manifest() const { return manifest_; }

  absl::StatusOr<Checksums> Checksum(
      const std::vector<std::filesystem::path>& files) const;

  // True when `step` completed with exactly these inputs and its recorded
  // artifacts still match on disk.
  absl::StatusOr<bool> IsComplete(const std::string& step,
                                  const Checksums& inputs) const;
  // True when `step` has any completion record (possibly stale).
  bool HasRecord(const std::string& step) const;

  absl::Status MarkStarted(const std::string& step, const Json& args);
  absl::Status MarkComplete(const std::string& step, const Json& args,
                            const Checksums& inputs,
                            const std::vector<std::filesystem::path>& artifacts);

 private:
  RunDirectory(std::filesystem::path path, Json manifest)
      : path_(std::move(path)), manifest_(std::move(manifest)) {}
  absl::Status WriteManifest();
  std::string Relative(const std::filesystem::path& p) const;

  std::filesystem::path path_;
  Json manifest_;
  bool owns_lock_ = true;
};

std::string UtcTimestamp();

}  // namespace aotk::cli

#endif  // AOTK_TOOLS_RUN_DIR_H_
