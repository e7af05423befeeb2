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

#include "run_dir.h"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <ctime>
#include <fstream>
#include <system_error>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "aotk/status.h"

namespace aotk::cli {
namespace fs = std::filesystem;
namespace {

constexpr char kLockFile[] = ".lock";
constexpr char kManifestFile[] = "manifest.json";

Json Without(Json config, const std::vector<std::string>& keys) {
  for (const std::string& k : keys) config.erase(k);
  return config;
}

// A lock whose recorded process no longer exists.
bool StaleLock(const fs::path& lock) {
  std::ifstream in(lock);
  long pid = 0;
  if (!(in >> pid) || pid <= 0) return false;
  return ::kill(static_cast<pid_t>(pid), 0) != 0 && errno == ESRCH;
}

}  // namespace

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

absl::StatusOr<RunDirectory> RunDirectory::Open(
    const fs::path& root, const std::string& run_id, const Json& config,
    const std::vector<std::string>& ignored_keys) {
  const fs::path dir = root / run_id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return ConfigError(absl::StrCat("cannot create run directory ",
                                    dir.string(), ": ", ec.message()));
  }
  const fs::path lock = dir / kLockFile;
  int fd = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0 && StaleLock(lock)) {
    fs::remove(lock, ec);
    fd = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  }
  if (fd < 0) {
    return ConfigError(absl::StrCat(
        "run directory ", dir.string(),
        " is in use by another process (remove ", lock.string(),
        " if it is stale)"));
  }
  const std::string pid = absl::StrCat(::getpid(), "\n");
  (void)!::write(fd, pid.data(), pid.size());
  ::close(fd);

  RunDirectory run(dir, Json::object());
  const fs::path manifest_path = dir / kManifestFile;
  if (fs::exists(manifest_path)) {
    auto text = ReadFile(manifest_path);
    if (!text.ok()) return text.status();
    Json m = Json::parse(*text, nullptr, false);
    if (m.is_discarded() || !m.is_object() || !m.contains("config")) {
      return DataError(absl::StrCat(manifest_path.string(), " is corrupt"));
    }
    const Json before = Without(m["config"], ignored_keys);
    const Json now = Without(config, ignored_keys);
    if (before != now) {
      std::vector<std::string> differing;
      for (const auto& [k, v] : now.items()) {
        if (!before.contains(k) || before[k] != v) differing.push_back(k);
      }
      for (const auto& [k, v] : before.items()) {
        if (!now.contains(k)) differing.push_back(k);
      }
      return ConfigError(absl::StrCat(
          "run '", run_id, "' already exists with a different config (",
          absl::StrJoin(differing, ", "), "); use a new run_id"));
    }
    run.manifest_ = std::move(m);
  } else {
    run.manifest_ = Json{{"tool", "aotk"},
                         {"version", kToolVersion},
                         {"run_id", run_id},
                         {"created_at", UtcTimestamp()},
                         {"config", config},
                         {"steps", Json::object()}};
    AOTK_RETURN_IF_ERROR(run.WriteManifest());
  }
  return run;
}

RunDirectory::RunDirectory(RunDirectory&& other) noexcept
    : path_(std::move(other.path_)),
      manifest_(std::move(other.manifest_)),
      owns_lock_(other.owns_lock_) {
  other.owns_lock_ = false;
}

RunDirectory::~RunDirectory() {
  if (owns_lock_ && !path_.empty()) {
    std::error_code ec;
    fs::remove(path_ / kLockFile, ec);
  }
}

absl::Status RunDirectory::WriteManifest() {
  manifest_["updated_at"] = UtcTimestamp();
  return WriteFileAtomically(path_ / kManifestFile, manifest_.dump(2) + "\n");
}

std::string RunDirectory::Relative(const fs::path& p) const {
  const fs::path abs = fs::absolute(p).lexically_normal();
  const fs::path base = fs::absolute(path_).lexically_normal();
  const fs::path rel = abs.lexically_relative(base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return abs.generic_string();
}

absl::StatusOr<Checksums> RunDirectory::Checksum(
    const std::vector<fs::path>& files) const {
  Checksums out;
  for (const fs::path& f : files) {
    AOTK_ASSIGN_OR_RETURN(std::string sha, Sha256HexOfFile(f));
    out[Relative(f)] = sha;
  }
  return out;
}

bool RunDirectory::HasRecord(const std::string& step) const {
  return manifest_["steps"].contains(step);
}

absl::StatusOr<bool> RunDirectory::IsComplete(const std::string& step,
                                              const Checksums& inputs) const {
  const Json& steps = manifest_["steps"];
  if (!steps.contains(step)) return false;
  const Json& rec = steps[step];
  if (rec.value("status", "") != "complete") return false;
  if (rec.value("inputs", Json::object()) != Json(inputs)) return false;
  const Json artifacts = rec.value("artifacts", Json::object());
  for (const auto& [rel, sha] : artifacts.items()) {
    const fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : path_ / rel;
    auto now = Sha256HexOfFile(p);
    if (!now.ok() || *now != sha.get<std::string>()) return false;
  }
  return true;
}

absl::Status RunDirectory::MarkStarted(const std::string& step,
                                       const Json& args) {
  Json& rec = manifest_["steps"][step];
  rec["status"] = "running";
  rec["args"] = args;
  rec["started_at"] = UtcTimestamp();
  rec.erase("completed_at");
  return WriteManifest();
}

absl::Status RunDirectory::MarkComplete(const std::string& step,
                                        const Json& args,
                                        const Checksums& inputs,
                                        const std::vector<fs::path>& artifacts) {
  AOTK_ASSIGN_OR_RETURN(Checksums sums, Checksum(artifacts));
  Json& rec = manifest_["steps"][step];
  rec["status"] = "complete";
  rec["args"] = args;
  rec["inputs"] = inputs;
  rec["artifacts"] = sums;
  rec["completed_at"] = UtcTimestamp();
  return WriteManifest();
}

}  // namespace aotk::cli
