#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include <json.hpp>

#include "aetrace/logging.hpp"

namespace aetrace {

struct GatewayConfig {
    std::string endpoint = "https://api.deepseek.com/chat/completions";
    std::string model_id = "deepseek-chat";
    double temperature = 0.0; // pipeline mode requires exactly 0.0
    long max_context = 128000;
    std::string api_key_env = "AETRACE_API_KEY";
    std::string system_prompt = "Expert assistant for structured data extraction";
};

// Chat-style completion gateway. Implementations return the assistant message
// content; failures surface as GatewayError.
class TextModelGateway {
public:
    virtual ~TextModelGateway() = default;
    virtual std::string complete(const std::string& system_prompt,
                                 const std::string& user_prompt) = 0;
};

// Request payload carries system prompt, user prompt, model and temperature
// only; penalty parameters are never sent.
nlohmann::json build_chat_payload(const GatewayConfig& cfg, const std::string& system_prompt,
                                  const std::string& user_prompt);

// Parses the assistant content out of a chat completion response body.
std::string parse_chat_response(const std::string& body);

class HttpChatGateway : public TextModelGateway {
public:
    explicit HttpChatGateway(GatewayConfig cfg, Log& log = null_log());
    std::string complete(const std::string& system_prompt,
                         const std::string& user_prompt) override;

private:
    GatewayConfig cfg_;
    Log& log_;
};

// Canned responses keyed by SHA-256 of the user prompt; the whole test suite
// and the fixture pipeline run on this. Counts calls so tests can assert the
// gateway was (not) consulted.
class StubGateway : public TextModelGateway {
public:
    StubGateway() = default;
    explicit StubGateway(std::map<std::string, std::string> responses_by_hash);

    static StubGateway from_file(const std::filesystem::path& json_file);
    static std::map<std::string, std::string> load_responses(const std::filesystem::path& json_file);

    void add_response_for_prompt(const std::string& user_prompt, const std::string& response);
    void add_response_for_hash(const std::string& hash, const std::string& response);
    void set_fallback(std::function<std::string(const std::string&)> fn);

    std::string complete(const std::string& system_prompt,
                         const std::string& user_prompt) override;

    int calls() const { return calls_.load(); }
    void reset_calls() { calls_ = 0; }

private:
    std::map<std::string, std::string> responses_;
    std::function<std::string(const std::string&)> fallback_;
    std::atomic<int> calls_{0};
};

// Content-addressed response cache. Identical (prompt, config) pairs never
// reach the live gateway twice; hits return the byte-identical prior
// response. Corrupt entries count as misses and are replaced with a warning.
class CachingGateway : public TextModelGateway {
public:
    CachingGateway(std::shared_ptr<TextModelGateway> inner, GatewayConfig cfg,
                   std::filesystem::path cache_dir, Log& log = null_log());

    std::string complete(const std::string& system_prompt,
                         const std::string& user_prompt) override;

    static std::string cache_key(const GatewayConfig& cfg, const std::string& system_prompt,
                                 const std::string& user_prompt);

    int live_calls() const { return live_calls_.load(); }

private:
    std::shared_ptr<TextModelGateway> inner_;
    GatewayConfig cfg_;
    std::filesystem::path cache_dir_;
    Log& log_;
    std::atomic<int> live_calls_{0};
};

} // namespace aetrace
