#include "solaudit/config.hpp"

#include "solaudit/error.hpp"
#include "solaudit/lexer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

namespace solaudit {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
    throw Error(ErrorKind::InvalidConfig, key + ": expected " + want + ", got '" + value + "'");
}

long long to_int(const std::string& key, const std::string& value) {
    long long out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) bad_value(key, value, "an integer");
    return out;
}

std::size_t to_count(const std::string& key, const std::string& value) {
    const long long v = to_int(key, value);
    if (v < 0) bad_value(key, value, "a non-negative integer");
    return static_cast<std::size_t>(v);
}

double to_real(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception&) {
        bad_value(key, value, "a number");
    }
    if (used != value.size() || !std::isfinite(out)) bad_value(key, value, "a number");
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad_value(key, value, "true or false");
}

std::string env_reference(const std::string& key, const std::string& value) {
    static const std::regex pattern(R"(^\$\{([A-Za-z_][A-Za-z0-9_]*)\}$)");
    std::smatch m;
    if (!std::regex_match(value, m, pattern)) bad_value(key, value, "${ENV_VAR}");
    return m[1].str();
}

using Setter = std::function<void(AppConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table{
        {"embedding.provider", [](AppConfig& c, const std::string& k, const std::string& v) {
             if (v == "local") c.embedding.kind = ProviderKind::LocalDeterministic;
             else if (v == "remote") c.embedding.kind = ProviderKind::Remote;
             else bad_value(k, v, "local or remote");
         }},
        {"embedding.endpoint", [](AppConfig& c, const std::string&, const std::string& v) { c.embedding.endpoint = v; }},
        {"embedding.model", [](AppConfig& c, const std::string&, const std::string& v) { c.embedding.model_name = v; }},
        {"embedding.dim", [](AppConfig& c, const std::string& k, const std::string& v) { c.embedding.dim = to_count(k, v); }},
        {"embedding.timeout_ms", [](AppConfig& c, const std::string& k, const std::string& v) {
             c.embedding.timeout = std::chrono::milliseconds(to_count(k, v));
         }},
        {"embedding.max_retries", [](AppConfig& c, const std::string& k, const std::string& v) {
             c.embedding.max_retries = static_cast<int>(to_count(k, v));
         }},
        {"embedding.retry_backoff_ms", [](AppConfig& c, const std::string& k, const std::string& v) {
             c.embedding.retry_backoff = std::chrono::milliseconds(to_count(k, v));
         }},
        {"embedding.max_in_flight", [](AppConfig& c, const std::string& k, const std::string& v) { c.embedding.max_in_flight = to_count(k, v); }},
        {"embedding.batch_size", [](AppConfig& c, const std::string& k, const std::string& v) { c.embedding.batch_size = to_count(k, v); }},
        {"embedding.api_key", [](AppConfig& c, const std::string& k, const std::string& v) { c.embedding.api_key_env = env_reference(k, v); }},
        {"embedding.strip_comments", [](AppConfig& c, const std::string& k, const std::string& v) { c.embedding.strip_comments = to_bool(k, v); }},
        {"llm.provider", [](AppConfig& c, const std::string& k, const std::string& v) {
             if (v == "scripted") c.llm.kind = LlmKind::Scripted;
             else if (v == "remote") c.llm.kind = LlmKind::Remote;
             else bad_value(k, v, "scripted or remote");
         }},
        {"llm.endpoint", [](AppConfig& c, const std::string&, const std::string& v) { c.llm.endpoint = v; }},
        {"llm.model", [](AppConfig& c, const std::string&, const std::string& v) { c.llm.model_name = v; }},
        {"llm.script", [](AppConfig& c, const std::string&, const std::string& v) { c.llm.script_path = v; }},
        {"llm.timeout_ms", [](AppConfig& c, const std::string& k, const std::string& v) {
             c.llm.timeout = std::chrono::milliseconds(to_count(k, v));
         }},
        {"llm.max_retries", [](AppConfig& c, const std::string& k, const std::string& v) {
             c.llm.max_retries = static_cast<int>(to_count(k, v));
         }},
        {"llm.retry_backoff_ms", [](AppConfig& c, const std::string& k, const std::string& v) {
             c.llm.retry_backoff = std::chrono::milliseconds(to_count(k, v));
         }},
        {"llm.max_in_flight", [](AppConfig& c, const std::string& k, const std::string& v) { c.llm.max_in_flight = to_count(k, v); }},
        {"llm.api_key", [](AppConfig& c, const std::string& k, const std::string& v) { c.llm.api_key_env = env_reference(k, v); }},
        {"theta", [](AppConfig& c, const std::string& k, const std::string& v) { c.theta = to_real(k, v); }},
        {"d_max", [](AppConfig& c, const std::string& k, const std::string& v) { c.d_max = static_cast<int>(to_count(k, v)); }},
        {"top_k", [](AppConfig& c, const std::string& k, const std::string& v) { c.top_k = to_count(k, v); }},
        {"kb_path", [](AppConfig& c, const std::string&, const std::string& v) { c.kb_path = v; }},
        {"severity_table", [](AppConfig& c, const std::string&, const std::string& v) { c.severity_table_path = v; }},
        {"log_level", [](AppConfig& c, const std::string& k, const std::string& v) {
             static const std::set<std::string> levels{"trace", "debug", "info", "warn", "error", "critical", "off"};
             if (!levels.count(v)) bad_value(k, v, "a log level");
             c.log_level = v;
         }},
        {"audit_gate", [](AppConfig& c, const std::string& k, const std::string& v) { c.audit_gate = to_real(k, v); }},
        {"parallelism", [](AppConfig& c, const std::string& k, const std::string& v) { c.parallelism = to_count(k, v); }},
        {"aggregation", [](AppConfig& c, const std::string& k, const std::string& v) {
             if (v == "max") c.aggregation = Aggregation::Max;
             else if (v == "mean") c.aggregation = Aggregation::Mean;
             else bad_value(k, v, "max or mean");
         }},
        {"layer_weights", [](AppConfig& c, const std::string& k, const std::string& v) {
             LayerWeights w{};
             std::stringstream in(v);
             std::string part;
             std::size_t n = 0;
             while (std::getline(in, part, ',')) {
                 if (n == 3) bad_value(k, v, "three comma-separated weights");
                 w[n++] = to_real(k, trim(part));
             }
             if (n != 3) bad_value(k, v, "three comma-separated weights");
             c.layer_weights = w;
         }},
    };
    return table;
}

}  // namespace

void AppConfig::validate() const {
    embedding.validate();
    if (!(theta > 0.0 && theta <= 1.0)) throw Error(ErrorKind::InvalidConfig, "theta must be in (0, 1]");
    if (d_max < 0) throw Error(ErrorKind::InvalidConfig, "d_max must be >= 0");
    if (top_k == 0) throw Error(ErrorKind::InvalidConfig, "top_k must be >= 1");
    if (!(audit_gate >= 0.0 && audit_gate <= 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "audit_gate must be in [0, 1]");
    }
    if (parallelism == 0) throw Error(ErrorKind::InvalidConfig, "parallelism must be >= 1");
    if (layer_weights) {
        double sum = 0.0;
        for (const double w : *layer_weights) {
            if (w < 0.0) throw Error(ErrorKind::InvalidConfig, "layer weights must be >= 0");
            sum += w;
        }
        if (sum <= 0.0) throw Error(ErrorKind::InvalidConfig, "layer weights sum to zero");
    }
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    const auto lines = lex::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::InvalidConfig,
                        "line " + std::to_string(i + 1) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(i + 1) + ": empty key");
        }
        if (!out.emplace(key, value).second) {
            throw Error(ErrorKind::InvalidConfig, "duplicate key '" + key + "'");
        }
    }
    return out;
}

void apply_config_value(AppConfig& config, const std::string& key, const std::string& value) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
    const bool secret = key.size() >= 8 && key.compare(key.size() - 8, 8, ".api_key") == 0;
    if (!secret && value.find("${") != std::string::npos) {
        throw Error(ErrorKind::InvalidConfig,
                    key + ": environment interpolation is only allowed for api_key entries");
    }
    it->second(config, key, value);
}

AppConfig load_config(const std::filesystem::path& path, AppConfig base) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    for (const auto& [key, value] : parse_key_values(buffer.str())) {
        apply_config_value(base, key, value);
    }
    return base;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [key, setter] : setters()) out.push_back(key);
        return out;
    }();
    return keys;
}

}  // namespace solaudit
