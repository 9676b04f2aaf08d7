#include "aetrace/gateway.hpp"

#include <cstdlib>

#include <httplib.h>

#include "aetrace/errors.hpp"
#include "aetrace/fsutil.hpp"
#include "aetrace/hash.hpp"

namespace aetrace {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json build_chat_payload(const GatewayConfig& cfg, const std::string& system_prompt,
                                  const std::string& user_prompt) {
    return json{
        {"model", cfg.model_id},
        {"temperature", cfg.temperature},
        {"messages",
         json::array({json{{"role", "system"}, {"content", system_prompt}},
                      json{{"role", "user"}, {"content", user_prompt}}})},
    };
}

std::string parse_chat_response(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ResponseFormatError(std::string("gateway response is not valid JSON: ") + e.what());
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
        throw ResponseFormatError("gateway response has no choices");
    const json& msg = doc["choices"][0].value("message", json::object());
    if (!msg.contains("content") || !msg["content"].is_string())
        throw ResponseFormatError("gateway response choice carries no message content");
    return msg["content"].get<std::string>();
}

// --- HttpChatGateway ---------------------------------------------------------

namespace {

// Splits "https://host/path" into (scheme://host, /path).
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = endpoint.find('/', host_start);
    if (path_start == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

} // namespace

HttpChatGateway::HttpChatGateway(GatewayConfig cfg, Log& log)
    : cfg_(std::move(cfg)), log_(log) {}

std::string HttpChatGateway::complete(const std::string& system_prompt,
                                      const std::string& user_prompt) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw GatewayError("API key environment variable '" + cfg_.api_key_env + "' is not set");

    auto [base, path] = split_endpoint(cfg_.endpoint);
    httplib::Client client(base);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(120, 0);

    httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
    const std::string payload = build_chat_payload(cfg_, system_prompt, user_prompt).dump();

    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
        log_.error("gateway_transport", httplib::to_string(res.error()), {{"endpoint", cfg_.endpoint}});
        throw GatewayError("gateway request to " + cfg_.endpoint +
                           " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        log_.error("gateway_status", "non-200 from gateway",
                   {{"endpoint", cfg_.endpoint}, {"status", res->status}});
        throw GatewayError("gateway returned status " + std::to_string(res->status));
    }
    return parse_chat_response(res->body);
}

// --- StubGateway -------------------------------------------------------------

StubGateway::StubGateway(std::map<std::string, std::string> responses_by_hash)
    : responses_(std::move(responses_by_hash)) {}

std::map<std::string, std::string> StubGateway::load_responses(const fs::path& json_file) {
    json doc = json::parse(read_file(json_file));
    std::map<std::string, std::string> out;
    for (auto it = doc.begin(); it != doc.end(); ++it)
        out[it.key()] = it.value().get<std::string>();
    return out;
}

StubGateway StubGateway::from_file(const fs::path& json_file) {
    return StubGateway(load_responses(json_file));
}

void StubGateway::add_response_for_prompt(const std::string& user_prompt,
                                          const std::string& response) {
    responses_[sha256_hex(user_prompt)] = response;
}

void StubGateway::add_response_for_hash(const std::string& hash, const std::string& response) {
    responses_[hash] = response;
}

void StubGateway::set_fallback(std::function<std::string(const std::string&)> fn) {
    fallback_ = std::move(fn);
}

std::string StubGateway::complete(const std::string& /*system_prompt*/,
                                  const std::string& user_prompt) {
    ++calls_;
    auto it = responses_.find(sha256_hex(user_prompt));
    if (it != responses_.end()) return it->second;
    if (fallback_) return fallback_(user_prompt);
    throw GatewayError("stub gateway has no response for prompt hash " +
                       sha256_hex(user_prompt));
}

// --- CachingGateway ----------------------------------------------------------

CachingGateway::CachingGateway(std::shared_ptr<TextModelGateway> inner, GatewayConfig cfg,
                               fs::path cache_dir, Log& log)
    : inner_(std::move(inner)), cfg_(std::move(cfg)), cache_dir_(std::move(cache_dir)),
      log_(log) {
    fs::create_directories(cache_dir_);
}

std::string CachingGateway::cache_key(const GatewayConfig& cfg, const std::string& system_prompt,
                                      const std::string& user_prompt) {
    // Canonical JSON of everything that influences the completion; any config
    // change that could alter the output lands in a different cache slot.
    json ident{
        {"model", cfg.model_id},
        {"temperature", cfg.temperature},
        {"system", system_prompt},
        {"user", user_prompt},
    };
    return sha256_hex(ident.dump());
}

std::string CachingGateway::complete(const std::string& system_prompt,
                                     const std::string& user_prompt) {
    const std::string key = cache_key(cfg_, system_prompt, user_prompt);
    const fs::path entry = cache_dir_ / (key + ".json");

    if (fs::exists(entry)) {
        try {
            json doc = json::parse(read_file(entry));
            if (doc.value("key", "") == key && doc.contains("response") &&
                doc["response"].is_string())
                return doc["response"].get<std::string>();
            log_.warn("cache_corrupt", "cache entry failed validation, treating as miss",
                      {{"entry", entry.string()}});
        } catch (const std::exception& e) {
            log_.warn("cache_corrupt", std::string("unreadable cache entry: ") + e.what(),
                      {{"entry", entry.string()}});
        }
    }

    std::string response = inner_->complete(system_prompt, user_prompt);
    ++live_calls_;
    json doc{{"key", key}, {"model", cfg_.model_id}, {"response", response}};
    write_file_atomic(entry, doc.dump(2) + "\n");
    return response;
}

} // namespace aetrace
