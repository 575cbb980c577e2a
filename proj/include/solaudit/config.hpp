#pragma once

#include "solaudit/embedding.hpp"
#include "solaudit/llm.hpp"
#include "solaudit/verifier.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace solaudit {

struct AppConfig {
    ProviderConfig embedding{};
    LlmConfig llm{};
    double theta = 0.9;
    int d_max = 3;
    std::size_t top_k = 10;
    std::filesystem::path kb_path = "solaudit.kb";
    std::optional<std::filesystem::path> severity_table_path;
    std::string log_level = "info";
    double audit_gate = 0.7;
    std::size_t parallelism = 1;
    Aggregation aggregation = Aggregation::Max;
    std::optional<LayerWeights> layer_weights;

    // Throws Error{InvalidConfig}.
    void validate() const;
};

// Flat `key = value` lines; blank lines and lines starting with '#' are
// ignored. Duplicate keys are an error. Throws Error{InvalidConfig}.
std::map<std::string, std::string> parse_key_values(const std::string& text);

// Sets one key. Unknown keys and malformed values throw Error{InvalidConfig}.
// Secret keys (embedding.api_key, llm.api_key) only accept `${ENV_VAR}`; the
// variable is read when a request is made, never stored.
void apply_config_value(AppConfig& config, const std::string& key, const std::string& value);

// Applies every key of the file on top of `base`.
AppConfig load_config(const std::filesystem::path& path, AppConfig base = {});

// Every recognized key, for documentation and `--set` validation.
const std::vector<std::string>& config_keys();

}  // namespace solaudit
