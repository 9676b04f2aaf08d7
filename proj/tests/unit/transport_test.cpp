#include <doctest.h>

#include <chrono>

#include "aetrace/errors.hpp"
#include "aetrace/fsutil.hpp"
#include "aetrace/transport.hpp"
#include "test_util.hpp"

using namespace aetrace;

namespace {

// Scripted transport: replays a fixed status/body sequence and records the
// URLs it was asked for.
class ScriptedTransport : public Transport {
public:
    explicit ScriptedTransport(std::vector<HttpResponse> script) : script_(std::move(script)) {}

    HttpResponse get(const std::string& url) override {
        urls.push_back(url);
        if (calls >= static_cast<int>(script_.size())) throw FetchError("script exhausted");
        return script_[static_cast<size_t>(calls++)];
    }

    int calls = 0;
    std::vector<std::string> urls;

private:
    std::vector<HttpResponse> script_;
};

FetchPolicy fast_policy(int retries) {
    FetchPolicy p;
    p.max_retries = retries;
    p.backoff_ms = {0, 0, 0};
    return p;
}

} // namespace

TEST_CASE("fetch_page returns a 200 html body on the first attempt") {
    ScriptedTransport t({{200, "<html>ok</html>", "text/html"}});
    auto body = fetch_page("http://x/page", fast_policy(3), t);
    CHECK(body == "<html>ok</html>");
    CHECK(t.calls == 1);
}

TEST_CASE("fetch_page retries 5xx up to the attempt budget then fails") {
    ScriptedTransport t({{500, "", ""}, {503, "", ""}, {200, "<html>late</html>", "text/html"}});
    auto body = fetch_page("http://x/slow", fast_policy(3), t);
    CHECK(body == "<html>late</html>");
    CHECK(t.calls == 3);

    ScriptedTransport all_bad({{500, "", ""}, {500, "", ""}, {500, "", ""}});
    CHECK_THROWS_AS(fetch_page("http://x/broken", fast_policy(3), all_bad), FetchError);
    CHECK(all_bad.calls == 3); // total attempts = max_retries
}

TEST_CASE("fetch_page treats 4xx as permanent") {
    ScriptedTransport t({{404, "missing", ""}});
    CHECK_THROWS_AS(fetch_page("http://x/gone", fast_policy(3), t), FetchError);
    CHECK(t.calls == 1);
}

TEST_CASE("fetch_page retries transport-level failures") {
    class Flaky : public Transport {
    public:
        HttpResponse get(const std::string&) override {
            if (++calls < 2) throw FetchError("connection reset");
            return {200, "<html>recovered</html>", "text/html"};
        }
        int calls = 0;
    } t;
    CHECK(fetch_page("http://x/flaky", fast_policy(3), t) == "<html>recovered</html>");
    CHECK(t.calls == 2);
}

TEST_CASE("fetch_page validates the content kind") {
    // Wrong content for the expectation is a ContentError, not a retry.
    ScriptedTransport not_pdf({{200, "<html>page</html>", "text/html"}});
    CHECK_THROWS_AS(
        fetch_page("http://x/doc.pdf", fast_policy(1), not_pdf, null_log(), ExpectedContent::Pdf),
        ContentError);

    // A PDF body with an empty content type passes via the magic-number sniff.
    ScriptedTransport sniffed({{200, "%PDF-1.4 binary", ""}});
    CHECK(fetch_page("http://x/doc.pdf", fast_policy(1), sniffed, null_log(),
                     ExpectedContent::Pdf) == "%PDF-1.4 binary");

    // Octet-stream with PDF magic also passes.
    ScriptedTransport octet({{200, "%PDF-1.7 x", "application/octet-stream"}});
    CHECK(fetch_page("http://x/d.pdf", fast_policy(1), octet, null_log(),
                     ExpectedContent::Pdf) == "%PDF-1.7 x");
}

TEST_CASE("rate limiter spaces consecutive acquisitions") {
    using clock = std::chrono::steady_clock;
    RateLimiter limiter(50.0); // 20 ms interval
    limiter.acquire();
    auto before = clock::now();
    limiter.acquire();
    limiter.acquire();
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - before);
    CHECK(elapsed.count() >= 30); // two further slots at 20 ms each, with slack
}

TEST_CASE("replay transport serves recorded bodies and 404s unknown urls") {
    testutil::TempDir dir;
    write_file(dir / "page.html", "<html>alpha</html>");
    write_file(dir / "doc.pdf", "%PDF-1.4 stub");
    ReplayTransport::write_manifest(dir,
                                    {{"http://x/a", "page.html"}, {"http://x/b.pdf", "doc.pdf"}},
                                    {{"http://x/a", "text/html"},
                                     {"http://x/b.pdf", "application/pdf"}});

    ReplayTransport t(dir);
    auto a = t.get("http://x/a");
    CHECK(a.status == 200);
    CHECK(a.body == "<html>alpha</html>");
    CHECK(a.content_type == "text/html");
    CHECK(t.get("http://x/b.pdf").content_type == "application/pdf");
    CHECK(t.get("http://x/unknown").status == 404);
}

TEST_CASE("recording transport captures responses for later replay") {
    testutil::TempDir dir;
    {
        auto inner = std::make_shared<ScriptedTransport>(
            std::vector<HttpResponse>{{200, "<html>hi</html>", "text/html"}});
        RecordingTransport rec(inner, dir);
        CHECK(rec.get("http://x/live").body == "<html>hi</html>");
    } // destructor flushes the manifest

    ReplayTransport replay(dir);
    auto r = replay.get("http://x/live");
    CHECK(r.status == 200);
    CHECK(r.body == "<html>hi</html>");
}
