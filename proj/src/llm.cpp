#include "solaudit/llm.hpp"

#include "solaudit/error.hpp"
#include "solaudit/hash.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace solaudit {

namespace {

std::string response_text(const nlohmann::json& value) {
    return value.is_string() ? value.get<std::string>() : value.dump();
}

std::vector<std::string> fragments(const nlohmann::json& rule, const char* key) {
    if (!rule.contains(key)) return {};
    const auto& value = rule[key];
    if (value.is_string()) return {value.get<std::string>()};
    return value.get<std::vector<std::string>>();
}

bool contains_all(const std::string& text, const std::vector<std::string>& parts) {
    for (const auto& p : parts) {
        if (text.find(p) == std::string::npos) return false;
    }
    return true;
}

}  // namespace

std::string prompt_hash(const Prompt& prompt) {
    std::string joined = prompt.system;
    joined.push_back('\0');
    joined += prompt.user;
    return to_hex(fnv1a64(joined));
}

void LlmConfig::validate() const {
    if (kind == LlmKind::Remote) {
        if (!endpoint || endpoint->empty()) {
            throw Error(ErrorKind::InvalidConfig, "remote LLM provider requires an endpoint");
        }
        if (max_retries < 0) throw Error(ErrorKind::InvalidConfig, "max_retries must be >= 0");
    } else if (!script_path) {
        throw Error(ErrorKind::InvalidConfig, "scripted LLM provider requires a script file");
    }
}

HttpLlmProvider::HttpLlmProvider(LlmConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    config_.validate();
    if (!transport_) transport_ = make_http_transport();
    limiter_ = std::make_unique<RequestLimiter>(config_.max_in_flight);
}

std::string HttpLlmProvider::name() const {
    return "remote:" + config_.model_name.value_or("default");
}

std::string HttpLlmProvider::complete(const Prompt& prompt) const {
    nlohmann::json payload;
    if (config_.model_name) payload["model"] = *config_.model_name;
    payload["system"] = prompt.system;
    payload["user"] = prompt.user;

    HttpHeaders headers;
    add_bearer_from_env(headers, config_.api_key_env);
    const RetryPolicy policy{config_.max_retries, config_.retry_backoff, config_.timeout};
    const HttpResponse response =
        post_with_retries(*transport_, *limiter_, policy, *config_.endpoint, payload.dump(), headers);
    try {
        const auto reply = nlohmann::json::parse(response.body);
        if (!reply.is_object() || !reply.contains("content") || !reply["content"].is_string()) {
            throw Error(ErrorKind::ProviderUnavailable, "response has no string 'content'");
        }
        return reply["content"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ProviderUnavailable, std::string("unparseable response: ") + e.what());
    }
}

ScriptedLlmProvider ScriptedLlmProvider::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open script " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

ScriptedLlmProvider ScriptedLlmProvider::from_json_text(const std::string& text) {
    ScriptedLlmProvider provider;
    try {
        const auto script = nlohmann::json::parse(text);
        if (!script.is_object()) throw Error(ErrorKind::InvalidConfig, "script must be an object");
        if (script.contains("by_hash")) {
            for (const auto& [hash, response] : script["by_hash"].items()) {
                provider.by_hash[hash] = response_text(response);
            }
        }
        if (script.contains("by_sequence")) {
            for (const auto& response : script["by_sequence"]) {
                provider.by_sequence.push_back(response_text(response));
            }
        }
        if (script.contains("rules")) {
            for (const auto& rule : script["rules"]) {
                Rule r;
                r.system_contains = fragments(rule, "system_contains");
                r.user_contains = fragments(rule, "user_contains");
                r.response = response_text(rule.at("response"));
                provider.rules.push_back(std::move(r));
            }
        }
        if (script.contains("default")) provider.fallback = response_text(script["default"]);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("bad LLM script: ") + e.what());
    }
    return provider;
}

std::string ScriptedLlmProvider::complete(const Prompt& prompt) const {
    const std::size_t seq = calls_.fetch_add(1);
    if (const auto it = by_hash.find(prompt_hash(prompt)); it != by_hash.end()) return it->second;
    if (seq < by_sequence.size()) return by_sequence[seq];
    for (const auto& rule : rules) {
        if (contains_all(prompt.system, rule.system_contains) &&
            contains_all(prompt.user, rule.user_contains)) {
            return rule.response;
        }
    }
    return fallback;
}

std::unique_ptr<LlmProvider> make_llm_provider(const LlmConfig& config,
                                               std::shared_ptr<HttpTransport> transport) {
    config.validate();
    if (config.kind == LlmKind::Remote) {
        return std::make_unique<HttpLlmProvider>(config, std::move(transport));
    }
    return std::make_unique<ScriptedLlmProvider>(ScriptedLlmProvider::from_file(*config.script_path));
}

}  // namespace solaudit
