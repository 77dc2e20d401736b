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

#include "clipcurate/freesound_client.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace clipcurate {

using json = nlohmann::json;

namespace {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string target;  // path?query
};

UrlParts SplitUrl(const std::string& url) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("URL without scheme: " + url);
  std::size_t path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, "/"};
  return {url.substr(0, path), url.substr(path)};
}

std::string PercentEncode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

std::string ReplaceAll(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

// Maps one search result onto a ClipRecord; nullopt when id or duration is
// missing.
std::optional<ClipRecord> RecordFromApi(const json& r, const ClientConfig& config) {
  if (!r.is_object()) return std::nullopt;
  ClipRecord rec;
  auto id = r.find("id");
  if (id == r.end()) return std::nullopt;
  if (id->is_number_integer()) {
    rec.clip_id = std::to_string(id->get<long long>());
  } else if (id->is_string()) {
    rec.clip_id = id->get<std::string>();
  } else {
    return std::nullopt;
  }
  auto duration = r.find("duration");
  if (duration == r.end() || !duration->is_number()) return std::nullopt;
  rec.duration = duration->get<double>();
  if (auto t = r.find("tags"); t != r.end() && t->is_array()) {
    for (const auto& tag : *t) {
      if (tag.is_string()) rec.tags.push_back(tag.get<std::string>());
    }
  }
  if (auto d = r.find("description"); d != r.end() && d->is_string()) {
    rec.description = d->get<std::string>();
  }
  if (auto l = r.find("license"); l != r.end() && l->is_string()) {
    rec.license = l->get<std::string>();
  }
  if (auto u = r.find("download"); u != r.end() && u->is_string()) {
    rec.download_url = u->get<std::string>();
  } else {
    rec.download_url = config.base_url + config.api_prefix + "/sounds/" + rec.clip_id +
                       "/download/";
  }
  return rec;
}

}  // namespace

std::string DurationWindow::Filter() const {
  std::ostringstream os;
  os << "duration:[" << FormatFixed(min_seconds, 1) << " TO " << FormatFixed(max_seconds, 1)
     << "]";
  return os.str();
}

TokenBucket::TokenBucket(double tokens_per_second, double burst)
    : rate_(tokens_per_second), burst_(std::max(1.0, burst)), tokens_(std::max(1.0, burst)),
      last_(Clock::now()) {
  if (!(tokens_per_second > 0.0)) throw std::invalid_argument("token rate must be positive");
}

void TokenBucket::Acquire() {
  for (;;) {
    std::chrono::duration<double> wait{};
    {
      std::lock_guard lock(mu_);
      auto now = Clock::now();
      tokens_ = std::min(burst_,
                         tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
      last_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    }
    std::this_thread::sleep_for(wait);
  }
}

MetadataCache::MetadataCache(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        ClipRecord rec = ClipRecordFromJson(line);
        records_[rec.clip_id] = std::move(rec);
      } catch (const std::invalid_argument&) {
        ++malformed_lines_;
      }
    }
  }
  if (std::filesystem::exists(state_path())) {
    try {
      next_page_ = json::parse(ReadFile(state_path())).at("next_page").get<int>();
    } catch (const json::exception& e) {
      throw std::runtime_error("corrupt cache state file '" + state_path().string() +
                               "': " + e.what());
    }
  }
}

std::filesystem::path MetadataCache::state_path() const {
  std::filesystem::path p = path_;
  p += ".state.json";
  return p;
}

void MetadataCache::CommitPage(const std::vector<ClipRecord>& records, int next_page) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot append to cache '" + path_.string() + "'");
    for (const auto& rec : records) out << ClipRecordToJsonLine(rec) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write failed for cache '" + path_.string() + "'");
  }
  for (const auto& rec : records) records_[rec.clip_id] = rec;
  next_page_ = next_page;
  WriteFile(state_path(), json{{"next_page", next_page_}}.dump() + "\n");
}

std::vector<ClipRecord> MetadataCache::Records() const {
  std::vector<ClipRecord> out;
  out.reserve(records_.size());
  for (const auto& [id, rec] : records_) out.push_back(rec);
  return out;
}

std::string_view DownloadStatusName(DownloadStatus status) {
  switch (status) {
    case DownloadStatus::kDownloaded:
      return "downloaded";
    case DownloadStatus::kSkipped:
      return "skipped";
    case DownloadStatus::kDeleted:
      return "deleted";
    case DownloadStatus::kConversionFailed:
      return "conversion_failed";
    case DownloadStatus::kInvalidFormat:
      return "invalid_format";
    case DownloadStatus::kNetworkError:
      return "network_error";
  }
  return "network_error";
}

std::string ExpandConverter(const std::string& templ, const std::filesystem::path& input,
                            const std::filesystem::path& output) {
  return ReplaceAll(ReplaceAll(templ, "{input}", ShellQuote(input.string())), "{output}",
                    ShellQuote(output.string()));
}

FreesoundClient::FreesoundClient(ClientConfig config)
    : config_(std::move(config)),
      bucket_(config_.requests_per_second, config_.burst) {
  sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

FreesoundClient::Response FreesoundClient::GetWithRetry(const std::string& url, int* requests,
                                                        std::size_t* throttled) {
  UrlParts parts = SplitUrl(url);
  httplib::Headers headers;
  if (!config_.token.empty()) {
    headers.emplace("Authorization", config_.auth_scheme + " " + config_.token);
  }
  auto backoff = config_.initial_backoff;
  Response last;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    bucket_.Acquire();
    httplib::Client client(parts.origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_follow_location(true);
    if (requests) ++*requests;
    auto res = client.Get(parts.target, headers);
    last = Response{};
    std::chrono::milliseconds wait = backoff;
    if (res) {
      last.status = res->status;
      last.body = res->body;
      const bool retryable = res->status == 429 || res->status >= 500;
      if (!retryable) return last;
      if (res->status == 429 && throttled) ++*throttled;
      if (res->has_header("Retry-After")) {
        char* end = nullptr;
        const std::string value = res->get_header_value("Retry-After");
        long seconds = std::strtol(value.c_str(), &end, 10);
        if (end != value.c_str() && seconds > 0) {
          wait = std::max(wait, std::chrono::milliseconds(seconds * 1000));
        }
      }
    }
    if (attempt == config_.max_retries) break;
    sleep(std::min(wait, config_.max_backoff));
    backoff = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(backoff.count()) * config_.backoff_factor));
  }
  return last;
}

FetchReport FreesoundClient::FetchMetadata(MetadataCache& cache) {
  FetchReport report;
  int page = cache.next_page();
  report.first_page = page;
  while (!config_.max_pages || report.pages_requested < *config_.max_pages) {
    std::ostringstream url;
    url << config_.base_url << config_.api_prefix << "/search/text/?query="
        << PercentEncode(config_.query) << "&filter=" << PercentEncode(config_.window.Filter())
        << "&sort=created_asc&page=" << page << "&page_size=" << config_.page_size
        << "&fields=id,tags,description,duration,license,download";
    int requests = 0;
    Response res = GetWithRetry(url.str(), &requests, &report.throttled);
    ++report.pages_requested;
    if (res.status == 401 || res.status == 403) {
      throw AuthError("search request rejected with HTTP " + std::to_string(res.status) +
                      "; check " + kCredentialsEnvVar);
    }
    if (res.status == 404) {  // past the last page
      report.complete = true;
      break;
    }
    if (res.status != 200) {
      throw ResumableAbort(page, "page " + std::to_string(page) + " failed after " +
                                     std::to_string(requests) + " attempts (HTTP " +
                                     std::to_string(res.status) + ")");
    }

    json doc = json::parse(res.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("results") ||
        !doc["results"].is_array()) {
      LogWarning("skipping malformed search page " + std::to_string(page));
      ++report.pages_malformed;
      cache.CommitPage({}, page + 1);
      ++page;
      continue;
    }
    std::vector<ClipRecord> keep;
    for (const auto& r : doc["results"]) {
      ++report.records_seen;
      auto rec = RecordFromApi(r, config_);
      if (!rec || !config_.window.Contains(rec->duration)) {
        ++report.records_filtered;
        continue;
      }
      keep.push_back(std::move(*rec));
    }
    report.records_stored += keep.size();
    cache.CommitPage(keep, page + 1);
    const bool has_next = doc.contains("next") && doc["next"].is_string();
    if (!has_next || doc["results"].empty()) {
      report.complete = true;
      break;
    }
    ++page;
  }
  return report;
}

DownloadResult FreesoundClient::DownloadClip(const ClipRecord& record,
                                             const std::filesystem::path& destination) {
  DownloadResult result;
  result.clip_id = record.clip_id;
  result.path = destination / (record.clip_id + ".wav");
  std::filesystem::create_directories(destination);
  if (std::filesystem::exists(result.path) &&
      VerifyAudioFormat(result.path, config_.format).ok()) {
    result.status = DownloadStatus::kSkipped;
    return result;
  }
  if (record.download_url.empty()) {
    result.status = DownloadStatus::kNetworkError;
    result.detail = "record has no download URL";
    return result;
  }

  Response res = GetWithRetry(record.download_url, &result.requests, nullptr);
  if (res.status == 401 || res.status == 403) {
    throw AuthError("download of clip " + record.clip_id + " rejected with HTTP " +
                    std::to_string(res.status));
  }
  if (res.status == 404 || res.status == 410) {
    result.status = DownloadStatus::kDeleted;
    result.detail = "clip no longer available upstream";
    return result;
  }
  if (res.status != 200) {
    result.status = DownloadStatus::kNetworkError;
    result.detail = "HTTP " + std::to_string(res.status);
    return result;
  }

  const auto original = destination / (record.clip_id + ".orig");
  const auto partial = destination / (record.clip_id + ".part.wav");
  WriteFile(original, res.body);
  std::error_code ec;
  std::filesystem::remove(partial, ec);
  const int rc = std::system(ExpandConverter(config_.converter, original, partial).c_str());
  std::filesystem::remove(original, ec);
  if (rc != 0 || !std::filesystem::exists(partial)) {
    std::filesystem::remove(partial, ec);
    result.status = DownloadStatus::kConversionFailed;
    result.detail = "converter exited with status " + std::to_string(rc);
    return result;
  }
  FormatReport report = VerifyAudioFormat(partial, config_.format);
  if (!report.ok()) {
    std::filesystem::remove(partial, ec);
    result.status = DownloadStatus::kInvalidFormat;
    result.detail = report.Summary();
    return result;
  }
  std::filesystem::rename(partial, result.path);
  result.status = DownloadStatus::kDownloaded;
  return result;
}

std::vector<DownloadResult> FreesoundClient::DownloadAll(const std::vector<ClipRecord>& records,
                                                         const std::filesystem::path& destination,
                                                         unsigned concurrency) {
  std::filesystem::create_directories(destination);
  std::vector<DownloadResult> results(records.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto log_path = destination / "download_log.jsonl";
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= records.size()) return;
      try {
        results[i] = DownloadClip(records[i], destination);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(records.size());
        return;
      }
      const json line = {{"clip_id", results[i].clip_id},
                         {"status", DownloadStatusName(results[i].status)},
                         {"detail", results[i].detail}};
      std::lock_guard lock(log_mu_);
      std::ofstream log(log_path, std::ios::app);
      log << line.dump() << '\n';
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned n = std::max(1u, concurrency);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace clipcurate
