#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "aetrace/logging.hpp"

namespace aetrace {

struct HttpResponse {
    int status = 0;
    std::string body;
    std::string content_type;
};

// All network access goes through this interface so the pipeline can run
// against recorded fixtures. Implementations throw FetchError only for
// transport-level failures (connection refused etc.); HTTP errors come back
// as status codes.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse get(const std::string& url) = 0;
};

// Live HTTP(S) client.
class HttpTransport : public Transport {
public:
    explicit HttpTransport(std::string user_agent = "aetrace/0.1");
    HttpResponse get(const std::string& url) override;

private:
    std::string user_agent_;
};

// Serves responses recorded under a directory with a manifest.json mapping
// URLs to body files. Unknown URLs answer 404.
class ReplayTransport : public Transport {
public:
    explicit ReplayTransport(std::filesystem::path dir);
    HttpResponse get(const std::string& url) override;

    static void write_manifest(const std::filesystem::path& dir,
                               const std::vector<std::pair<std::string, std::string>>& url_to_file,
                               const std::map<std::string, std::string>& content_types = {});

private:
    struct Entry {
        std::string file;
        int status = 200;
        std::string content_type;
    };
    std::filesystem::path dir_;
    std::map<std::string, Entry> entries_;
};

// Wraps another transport and records every response into a replay directory.
class RecordingTransport : public Transport {
public:
    RecordingTransport(std::shared_ptr<Transport> inner, std::filesystem::path dir);
    ~RecordingTransport() override;
    HttpResponse get(const std::string& url) override;

private:
    void flush_manifest();

    std::shared_ptr<Transport> inner_;
    std::filesystem::path dir_;
    std::map<std::string, std::pair<std::string, std::string>> recorded_; // url -> (file, type)
    int counter_ = 0;
    std::mutex mu_;
};

struct FetchPolicy {
    double rate_limit = 1.0; // requests per second, > 0
    int max_retries = 3;     // total attempts = max_retries, first included
    std::vector<int> backoff_ms = {250, 1000, 4000};
    std::string user_agent = "aetrace/0.1 (batch label pipeline)";
};

enum class ExpectedContent { Any, Html, Pdf };

// Serialises requests across threads to honour the per-host politeness rate.
class RateLimiter {
public:
    explicit RateLimiter(double per_second);
    void acquire();

private:
    std::chrono::steady_clock::time_point next_;
    std::chrono::steady_clock::duration interval_;
    std::mutex mu_;
};

// Retrying fetch. 5xx and transport failures are retried per policy; 4xx is
// permanent. Every attempt is logged with its outcome.
std::string fetch_page(const std::string& url, const FetchPolicy& policy, Transport& transport,
                       Log& log = null_log(), ExpectedContent expect = ExpectedContent::Html,
                       RateLimiter* limiter = nullptr);

} // namespace aetrace
