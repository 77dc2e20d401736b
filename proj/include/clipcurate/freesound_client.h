// Copyright 2026 The clipcurate Authors.
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

#ifndef CLIPCURATE_FREESOUND_CLIENT_H_
#define CLIPCURATE_FREESOUND_CLIENT_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clipcurate/clip_record.h"
#include "clipcurate/util.h"
#include "clipcurate/wav.h"

namespace clipcurate {

inline constexpr const char* kCredentialsEnvVar = "FREESOUND_API_KEY";

struct DurationWindow {
  double min_seconds = 0.3;
  double max_seconds = 30.0;

  bool Contains(double seconds) const {
    return seconds >= min_seconds && seconds <= max_seconds;
  }
  // Search filter expression, e.g. "duration:[0.3 TO 30.0]".
  std::string Filter() const;
};

// Thread-safe token bucket. Acquire() blocks until a token is available, so
// over any interval of length t at most burst + rate * t acquisitions succeed.
class TokenBucket {
 public:
  TokenBucket(double tokens_per_second, double burst);

  void Acquire();

 private:
  using Clock = std::chrono::steady_clock;

  std::mutex mu_;
  double rate_;
  double burst_;
  double tokens_;
  Clock::time_point last_;
};

class AuthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a page could not be fetched after every retry. The cache and its
// high-water mark are intact, so rerunning resumes from next_page().
class ResumableAbort : public std::runtime_error {
 public:
  ResumableAbort(int next_page, const std::string& what)
      : std::runtime_error(what), next_page_(next_page) {}
  int next_page() const { return next_page_; }

 private:
  int next_page_;
};

// Line-delimited JSON store of ClipRecords, appended page by page. A later
// line for the same id replaces the earlier one. A small JSON state file next
// to the cache records the next page to fetch.
class MetadataCache {
 public:
  explicit MetadataCache(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path state_path() const;

  // Appends and flushes the records, then advances the high-water mark.
  void CommitPage(const std::vector<ClipRecord>& records, int next_page);

  int next_page() const { return next_page_; }
  std::size_t size() const { return records_.size(); }
  std::size_t malformed_lines() const { return malformed_lines_; }
  bool contains(const std::string& clip_id) const { return records_.count(clip_id) > 0; }
  const ClipRecord& at(const std::string& clip_id) const { return records_.at(clip_id); }

  // Records in ascending clip-id order.
  std::vector<ClipRecord> Records() const;

 private:
  std::filesystem::path path_;
  std::map<std::string, ClipRecord, ClipIdOrder> records_;
  int next_page_ = 1;
  std::size_t malformed_lines_ = 0;
};

struct ClientConfig {
  std::string base_url = "https://freesound.org";
  std::string api_prefix = "/apiv2";
  std::string token;  // usually read from FREESOUND_API_KEY
  std::string auth_scheme = "Token";  // "Bearer" for OAuth2 access tokens
  std::string query;
  DurationWindow window;
  int page_size = 150;
  std::optional<int> max_pages;
  double requests_per_second = 1.0;
  double burst = 1.0;
  int max_retries = 5;
  std::chrono::milliseconds initial_backoff{1000};
  double backoff_factor = 2.0;
  std::chrono::milliseconds max_backoff{60000};
  std::chrono::seconds timeout{30};
  // Shell command producing the target WAV; {input} and {output} are
  // replaced with quoted paths.
  std::string converter =
      "ffmpeg -nostdin -loglevel error -y -i {input} -ac 1 -ar 44100 -sample_fmt s16 {output}";
  AudioFormatRequirements format;
};

struct FetchReport {
  int first_page = 1;
  int pages_requested = 0;
  int pages_malformed = 0;
  std::size_t records_seen = 0;
  std::size_t records_filtered = 0;
  std::size_t records_stored = 0;
  std::size_t throttled = 0;
  bool complete = false;
};

enum class DownloadStatus { kDownloaded, kSkipped, kDeleted, kConversionFailed, kInvalidFormat,
                            kNetworkError };

std::string_view DownloadStatusName(DownloadStatus status);

struct DownloadResult {
  std::string clip_id;
  DownloadStatus status = DownloadStatus::kNetworkError;
  std::filesystem::path path;
  std::string detail;
  int requests = 0;
};

class FreesoundClient {
 public:
  explicit FreesoundClient(ClientConfig config);

  const ClientConfig& config() const { return config_; }

  // Pages through the search endpoint from cache.next_page(), committing each
  // page to the cache before requesting the next. Records outside the
  // duration window are dropped even if the server returned them.
  // Throws AuthError on 401/403 and ResumableAbort after exhausting retries.
  FetchReport FetchMetadata(MetadataCache& cache);

  // Downloads one clip and converts it into destination/<id>.wav. A file that
  // already verifies is left alone without touching the network. A missing
  // upstream file (404) is reported as kDeleted, not thrown.
  DownloadResult DownloadClip(const ClipRecord& record, const std::filesystem::path& destination);

  // DownloadClip over many records with up to concurrency workers sharing the
  // client's rate budget. Results come back in input order and are appended
  // to destination/download_log.jsonl.
  std::vector<DownloadResult> DownloadAll(const std::vector<ClipRecord>& records,
                                          const std::filesystem::path& destination,
                                          unsigned concurrency = 4);

  // Sleep hook, replaceable in tests.
  std::function<void(std::chrono::milliseconds)> sleep;

 private:
  struct Response {
    int status = 0;  // 0 when the connection failed
    std::string body;
  };

  Response GetWithRetry(const std::string& url, int* requests, std::size_t* throttled);

  ClientConfig config_;
  TokenBucket bucket_;
  std::mutex log_mu_;
};

// Builds the converter command, single-quoting both paths for the shell.
std::string ExpandConverter(const std::string& templ, const std::filesystem::path& input,
                            const std::filesystem::path& output);

}  // namespace clipcurate

#endif  // CLIPCURATE_FREESOUND_CLIENT_H_
