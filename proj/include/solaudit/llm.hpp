#pragma once

#include "solaudit/http_transport.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace solaudit {

struct Prompt {
    std::string system;
    std::string user;

    bool operator==(const Prompt&) const = default;
};

// 16 hex digits of FNV-1a over system + '\0' + user. Keys scripted responses.
std::string prompt_hash(const Prompt& prompt);

class LlmProvider {
public:
    virtual ~LlmProvider() = default;

    // Throws Error{ProviderUnavailable} on transport failure.
    virtual std::string complete(const Prompt& prompt) const = 0;
    virtual std::string name() const = 0;
};

enum class LlmKind { Remote, Scripted };

struct LlmConfig {
    LlmKind kind = LlmKind::Scripted;
    std::optional<std::string> endpoint;
    std::optional<std::string> model_name;
    std::optional<std::filesystem::path> script_path;
    std::chrono::milliseconds timeout{120000};
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{500};
    std::size_t max_in_flight = 4;
    std::string api_key_env = "SOLAUDIT_LLM_API_KEY";

    void validate() const;
};

// Chat-style endpoint: {"model"?, "system", "user"} -> {"content"}.
class HttpLlmProvider final : public LlmProvider {
public:
    HttpLlmProvider(LlmConfig config, std::shared_ptr<HttpTransport> transport);

    std::string complete(const Prompt& prompt) const override;
    std::string name() const override;

private:
    LlmConfig config_;
    std::shared_ptr<HttpTransport> transport_;
    std::unique_ptr<RequestLimiter> limiter_;
};

// Canned responses for tests and offline runs. Script file (JSON object):
//   "by_hash":     { "<prompt_hash>": response, ... }
//   "by_sequence": [ response, ... ]          (n-th call, 0-based)
//   "rules":       [ { "system_contains"?: text | [text], "user_contains"?: text | [text],
//                      "response": response }, ... ]
//                  (every listed fragment must occur; first matching rule wins)
//   "default":     response                   (otherwise; "[]" if absent)
// A response is a string, or any JSON value which is returned serialized.
// Lookup order: by_hash, by_sequence, rules, default.
class ScriptedLlmProvider final : public LlmProvider {
public:
    struct Rule {
        std::vector<std::string> system_contains;
        std::vector<std::string> user_contains;
        std::string response;
    };

    ScriptedLlmProvider() = default;
    ScriptedLlmProvider(ScriptedLlmProvider&& other) noexcept
        : by_hash(std::move(other.by_hash)),
          by_sequence(std::move(other.by_sequence)),
          rules(std::move(other.rules)),
          fallback(std::move(other.fallback)),
          calls_(other.calls_.load()) {}

    static ScriptedLlmProvider from_file(const std::filesystem::path& path);
    static ScriptedLlmProvider from_json_text(const std::string& text);

    std::string complete(const Prompt& prompt) const override;
    std::string name() const override { return "scripted"; }

    std::map<std::string, std::string> by_hash;
    std::vector<std::string> by_sequence;
    std::vector<Rule> rules;
    std::string fallback = "[]";

private:
    mutable std::atomic<std::size_t> calls_{0};
};

class CallbackLlmProvider final : public LlmProvider {
public:
    using Callback = std::function<std::string(const Prompt&)>;

    explicit CallbackLlmProvider(Callback callback, std::string name = "callback")
        : callback_(std::move(callback)), name_(std::move(name)) {}

    std::string complete(const Prompt& prompt) const override { return callback_(prompt); }
    std::string name() const override { return name_; }

private:
    Callback callback_;
    std::string name_;
};

std::unique_ptr<LlmProvider> make_llm_provider(const LlmConfig& config,
                                               std::shared_ptr<HttpTransport> transport = nullptr);

}  // namespace solaudit
