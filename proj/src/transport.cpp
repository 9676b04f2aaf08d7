#include "aetrace/transport.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "aetrace/errors.hpp"
#include "aetrace/fsutil.hpp"
#include "aetrace/strings.hpp"

namespace aetrace {

namespace {

struct UrlParts {
    std::string scheme_host; // e.g. https://ec.europa.eu
    std::string path;        // /health/...
};

UrlParts split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw FetchError("malformed URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    UrlParts parts;
    if (path_start == std::string::npos) {
        parts.scheme_host = url;
        parts.path = "/";
    } else {
        parts.scheme_host = url.substr(0, path_start);
        parts.path = url.substr(path_start);
    }
    return parts;
}

bool looks_like_html(const HttpResponse& r) {
    if (r.content_type.find("html") != std::string::npos) return true;
    if (!r.content_type.empty()) return false;
    const std::string head = to_lower(r.body.substr(0, 256));
    return head.find("<html") != std::string::npos || head.find("<!doctype") != std::string::npos;
}

bool looks_like_pdf(const HttpResponse& r) {
    if (r.content_type.find("pdf") != std::string::npos) return true;
    if (!r.content_type.empty() && r.content_type.find("octet-stream") == std::string::npos)
        return false;
    return r.body.rfind("%PDF", 0) == 0;
}

} // namespace

HttpTransport::HttpTransport(std::string user_agent) : user_agent_(std::move(user_agent)) {}

HttpResponse HttpTransport::get(const std::string& url) {
    UrlParts parts = split_url(url);
    httplib::Client client(parts.scheme_host);
    client.set_follow_location(true);
    client.set_connection_timeout(30);
    client.set_read_timeout(60);
    httplib::Headers headers{{"User-Agent", user_agent_}};
    auto result = client.Get(parts.path, headers);
    if (!result) throw FetchError("transport failure for " + url + ": " +
                                  httplib::to_string(result.error()));
    HttpResponse resp;
    resp.status = result->status;
    resp.body = result->body;
    resp.content_type = result->get_header_value("Content-Type");
    return resp;
}

ReplayTransport::ReplayTransport(std::filesystem::path dir) : dir_(std::move(dir)) {
    const auto manifest_path = dir_ / "manifest.json";
    if (!std::filesystem::exists(manifest_path))
        throw ConfigError("replay directory has no manifest.json: " + dir_.string());
    nlohmann::json manifest = nlohmann::json::parse(read_file(manifest_path));
    for (const auto& item : manifest.at("entries")) {
        Entry e;
        e.file = item.at("file").get<std::string>();
        e.status = item.value("status", 200);
        e.content_type = item.value("content_type", "");
        entries_[item.at("url").get<std::string>()] = std::move(e);
    }
}

HttpResponse ReplayTransport::get(const std::string& url) {
    auto it = entries_.find(url);
    if (it == entries_.end()) return {404, "", "text/plain"};
    HttpResponse resp;
    resp.status = it->second.status;
    resp.content_type = it->second.content_type;
    if (!it->second.file.empty()) resp.body = read_file(dir_ / it->second.file);
    return resp;
}

void ReplayTransport::write_manifest(
    const std::filesystem::path& dir,
    const std::vector<std::pair<std::string, std::string>>& url_to_file,
    const std::map<std::string, std::string>& content_types) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [url, file] : url_to_file) {
        nlohmann::json item{{"url", url}, {"file", file}, {"status", 200}};
        auto it = content_types.find(url);
        if (it != content_types.end()) item["content_type"] = it->second;
        entries.push_back(std::move(item));
    }
    write_file(dir / "manifest.json", nlohmann::json{{"entries", entries}}.dump(2) + "\n");
}

RecordingTransport::RecordingTransport(std::shared_ptr<Transport> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

RecordingTransport::~RecordingTransport() { flush_manifest(); }

HttpResponse RecordingTransport::get(const std::string& url) {
    HttpResponse resp = inner_->get(url);
    std::lock_guard lock(mu_);
    if (resp.status == 200 && !recorded_.count(url)) {
        std::string name = "resp_" + std::to_string(counter_++) + ".bin";
        write_file(dir_ / name, resp.body);
        recorded_[url] = {name, resp.content_type};
        flush_manifest();
    }
    return resp;
}

void RecordingTransport::flush_manifest() {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::map<std::string, std::string> types;
    for (const auto& [url, rec] : recorded_) {
        pairs.emplace_back(url, rec.first);
        if (!rec.second.empty()) types[url] = rec.second;
    }
    ReplayTransport::write_manifest(dir_, pairs, types);
}

RateLimiter::RateLimiter(double per_second) {
    if (per_second <= 0) throw ConfigError("rate_limit must be > 0");
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / per_second));
    next_ = std::chrono::steady_clock::now();
}

void RateLimiter::acquire() {
    std::unique_lock lock(mu_);
    auto now = std::chrono::steady_clock::now();
    if (now < next_) {
        auto wait = next_ - now;
        next_ += interval_;
        lock.unlock();
        std::this_thread::sleep_for(wait);
        return;
    }
    next_ = now + interval_;
}

std::string fetch_page(const std::string& url, const FetchPolicy& policy, Transport& transport,
                       Log& log, ExpectedContent expect, RateLimiter* limiter) {
    const int attempts = std::max(1, policy.max_retries);
    int last_status = 0;
    std::string last_error;

    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1) {
            size_t idx = std::min(size_t(attempt - 2), policy.backoff_ms.size() - 1);
            int delay = policy.backoff_ms.empty() ? 0 : policy.backoff_ms[idx];
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        if (limiter) limiter->acquire();

        HttpResponse resp;
        try {
            resp = transport.get(url);
        } catch (const FetchError& e) {
            last_error = e.what();
            log.warn("fetch_attempt_failed", e.what(), {{"url", url}, {"attempt", attempt}});
            continue;
        }
        last_status = resp.status;
        log.info("fetch", "GET " + url,
                 {{"url", url}, {"status", resp.status}, {"attempt", attempt}});

        if (resp.status >= 200 && resp.status < 300) {
            if (expect == ExpectedContent::Html && !looks_like_html(resp))
                throw ContentError("expected HTML from " + url + ", got '" + resp.content_type +
                                   "'");
            if (expect == ExpectedContent::Pdf && !looks_like_pdf(resp))
                throw ContentError("expected PDF from " + url + ", got '" + resp.content_type +
                                   "'");
            return resp.body;
        }
        if (resp.status >= 400 && resp.status < 500) break; // permanent
    }

    std::string detail = last_status ? "last status " + std::to_string(last_status) : last_error;
    throw FetchError("fetch failed for " + url + " (" + detail + ")");
}

} // namespace aetrace
