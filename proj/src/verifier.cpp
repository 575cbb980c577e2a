#include "solaudit/verifier.hpp"

#include "solaudit/error.hpp"
#include "solaudit/serialization.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

namespace solaudit {

namespace {

constexpr std::array<Layer, 3> kLayers{{
    {LayerId::Syntax, "Syntax",
     "What are the fundamental syntax-level security requirements?",
     "Solidity language-level rules: visibility specifiers, low-level calls, arithmetic, "
     "input validation, compiler version pragmas and deprecated constructs."},
    {LayerId::DesignPattern, "Design Pattern",
     "What design principles should this pattern follow?",
     "Application of established Solidity patterns such as checks-effects-interactions, "
     "access control and pull-over-push payments, and anti-patterns that break them."},
    {LayerId::Architecture, "Architecture",
     "What are the system-level security implications?",
     "How the function fits the contract as a whole: call relationships, trust boundaries "
     "with external contracts, upgradeability, privileged roles and state consistency."},
}};

std::string format_similarity(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.4f", value);
    return buffer;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += sep;
        out += items[i];
    }
    return out;
}

std::string join_or_none(const std::vector<std::string>& items) {
    return items.empty() ? std::string("none") : join(items, ", ");
}

constexpr std::string_view kOutputSchema =
    "Respond with a JSON array and nothing else. Each element describes one bad practice:\n"
    "{\"swc_id\": \"SWC-<digits>\" (optional), \"title\": string, \"reason\": string,\n"
    " \"location\": {\"start_line\": integer, \"end_line\": integer},\n"
    " \"suggestion\": string (optional), \"severity\": number in [0, 1] (optional),\n"
    " \"category\": string (optional, for issues without an SWC id)}\n"
    "Line numbers refer to the original source file. Return [] when nothing is found.";

// Position one past the ']' matching the '[' at `open`, or npos.
std::size_t match_bracket(std::string_view text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '[') {
            ++depth;
        } else if (c == ']') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

std::optional<Json> extract_array(std::string_view text) {
    for (std::size_t pos = text.find('['); pos != std::string_view::npos;
         pos = text.find('[', pos + 1)) {
        const std::size_t end = match_bracket(text, pos);
        if (end == std::string_view::npos) continue;
        Json parsed = Json::parse(text.substr(pos, end - pos), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_array()) return parsed;
    }
    return std::nullopt;
}

std::string_view trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::optional<CodeLocation> parse_location(const Json& value, std::string& problem) {
    CodeLocation loc;
    if (value.is_object()) {
        if (!value.contains("start_line") || !value["start_line"].is_number_integer()) {
            problem = "location.start_line missing or not an integer";
            return std::nullopt;
        }
        loc.start_line = value["start_line"].get<int>();
        loc.end_line = loc.start_line;
        if (value.contains("end_line")) {
            if (!value["end_line"].is_number_integer()) {
                problem = "location.end_line is not an integer";
                return std::nullopt;
            }
            loc.end_line = value["end_line"].get<int>();
        }
    } else if (value.is_string()) {
        static const std::regex pattern(R"(^\s*L?(\d{1,9})(?:\s*-\s*L?(\d{1,9}))?\s*$)");
        const std::string text = value.get<std::string>();
        std::smatch m;
        if (!std::regex_match(text, m, pattern)) {
            problem = "unrecognized location '" + text + "'";
            return std::nullopt;
        }
        loc.start_line = std::stoi(m[1].str());
        loc.end_line = m[2].matched ? std::stoi(m[2].str()) : loc.start_line;
    } else if (value.is_number_integer()) {
        loc.start_line = loc.end_line = value.get<int>();
    } else {
        problem = "location has unsupported type";
        return std::nullopt;
    }
    if (loc.start_line < 1 || loc.end_line < loc.start_line) {
        problem = "location range is invalid";
        return std::nullopt;
    }
    return loc;
}

std::optional<std::string> optional_string(const Json& item, const char* key) {
    if (!item.contains(key) || item[key].is_null()) return std::nullopt;
    if (!item[key].is_string()) throw std::invalid_argument(std::string(key) + " is not a string");
    return item[key].get<std::string>();
}

LayerFinding parse_item(const Json& item, LayerId layer, const SeverityTable& table,
                        std::vector<std::string>& warnings) {
    if (!item.is_object()) throw std::invalid_argument("finding is not an object");
    LayerFinding finding;
    finding.layer = layer;
    if (auto swc = optional_string(item, "swc_id")) {
        const std::string id{trim(*swc)};
        if (is_swc_id(id)) {
            finding.swc_id = id;
        } else if (!id.empty()) {
            warnings.push_back("ignored malformed swc_id '" + id + "'");
        }
    }
    auto title = optional_string(item, "title");
    if (title && !trim(*title).empty()) {
        finding.title = *title;
    } else if (finding.swc_id) {
        finding.title = *finding.swc_id;
    } else {
        throw std::invalid_argument("finding has neither title nor swc_id");
    }
    finding.reason = optional_string(item, "reason").value_or("");
    finding.suggestion = optional_string(item, "suggestion");
    finding.category = optional_string(item, "category");
    if (item.contains("location") && !item["location"].is_null()) {
        std::string problem;
        finding.location = parse_location(item["location"], problem);
        if (!finding.location) warnings.push_back("dropped location: " + problem);
    }
    std::optional<double> claimed;
    if (item.contains("severity") && item["severity"].is_number()) {
        claimed = item["severity"].get<double>();
    }
    finding.severity = table.resolve(finding.swc_id, claimed);
    return finding;
}

}  // namespace

std::string_view to_string(LayerId id) noexcept {
    switch (id) {
        case LayerId::Syntax: return "Syntax";
        case LayerId::DesignPattern: return "DesignPattern";
        case LayerId::Architecture: return "Architecture";
    }
    return "Syntax";
}

std::optional<LayerId> layer_from_string(std::string_view text) noexcept {
    for (const auto& l : kLayers) {
        if (to_string(l.id) == text) return l.id;
    }
    return std::nullopt;
}

const std::array<Layer, 3>& layers() noexcept { return kLayers; }

const Layer& layer(LayerId id) noexcept { return kLayers[static_cast<std::size_t>(id)]; }

double SeverityTable::resolve(const std::optional<std::string>& swc_id,
                              std::optional<double> claimed) const {
    double score = default_score / 10.0;
    if (swc_id) {
        if (const auto it = scores.find(*swc_id); it != scores.end()) {
            return std::clamp(it->second / 10.0, 0.0, 1.0);
        }
    }
    if (claimed && std::isfinite(*claimed) && *claimed >= 0.0) {
        if (*claimed <= 1.0) {
            score = *claimed;
        } else if (*claimed <= 10.0) {
            score = *claimed / 10.0;
        }
    }
    return std::clamp(score, 0.0, 1.0);
}

void SeverityTable::validate() const {
    if (!std::isfinite(default_score) || default_score < 0.0 || default_score > 10.0) {
        throw Error(ErrorKind::InvalidConfig, "severity default must be in [0, 10]");
    }
    for (const auto& [id, score] : scores) {
        if (!is_swc_id(id)) throw Error(ErrorKind::InvalidConfig, "bad SWC id in severity table: " + id);
        if (!std::isfinite(score) || score < 0.0 || score > 10.0) {
            throw Error(ErrorKind::InvalidConfig, "severity for " + id + " must be in [0, 10]");
        }
    }
}

SeverityTable SeverityTable::defaults() {
    SeverityTable table;
    table.default_score = 5.0;
    table.scores = {
        {"SWC-100", 5.3}, {"SWC-101", 7.5}, {"SWC-102", 3.7}, {"SWC-103", 3.1},
        {"SWC-104", 5.3}, {"SWC-105", 9.1}, {"SWC-106", 9.1}, {"SWC-107", 8.8},
        {"SWC-108", 3.7}, {"SWC-109", 7.5}, {"SWC-110", 5.3}, {"SWC-111", 3.1},
        {"SWC-112", 9.0}, {"SWC-113", 7.5}, {"SWC-114", 5.9}, {"SWC-115", 7.5},
        {"SWC-116", 5.3}, {"SWC-117", 7.5}, {"SWC-118", 7.5}, {"SWC-119", 3.7},
        {"SWC-120", 5.9}, {"SWC-121", 7.5}, {"SWC-122", 7.5}, {"SWC-123", 5.3},
        {"SWC-124", 9.1}, {"SWC-125", 5.3}, {"SWC-126", 5.3}, {"SWC-127", 9.1},
        {"SWC-128", 7.5}, {"SWC-129", 5.3}, {"SWC-130", 5.3}, {"SWC-131", 3.1},
        {"SWC-132", 5.3}, {"SWC-133", 5.3}, {"SWC-134", 5.3}, {"SWC-135", 3.1},
        {"SWC-136", 5.3},
    };
    return table;
}

SeverityTable SeverityTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open severity table " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

SeverityTable SeverityTable::from_json_text(const std::string& text) {
    SeverityTable table;
    try {
        const Json j = Json::parse(text);
        table.default_score = j.value("default", 5.0);
        for (const auto& [id, score] : j.at("scores").items()) {
            table.scores[id] = score.get<double>();
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("bad severity table: ") + e.what());
    }
    table.validate();
    return table;
}

Prompt build_prompt(const Layer& layer, const ContextSlice& slice,
                    const std::vector<RetrievalHit>& retrieved) {
    const auto index = static_cast<int>(layer.id) + 1;
    Prompt prompt;
    std::string& sys = prompt.system;
    sys += "You are a smart contract auditor reviewing Solidity code for bad practices, both "
           "security weaknesses (classified by SWC id) and code quality problems.\n";
    sys += "Verification layer " + std::to_string(index) + " of 3: " + std::string(layer.title) +
           ".\n";
    sys += "Step-back question: " + std::string(layer.step_back_question) + "\n";
    sys += "Answer the step-back question for this kind of code in general terms first, then "
           "check the target function against those principles.\n";
    sys += "Layer focus: " + std::string(layer.focus) + "\n";
    sys += "Report only problems supported by the supplied code. Use the exemplars as reference "
           "patterns, not as findings.";

    const auto& meta = slice.metadata;
    const auto& fn = slice.main_function;
    std::string& user = prompt.user;
    user += "Contract: " + meta.contract_name + "\n";
    user += "Source file: " + meta.source_file + "\n";
    user += "Target function: " + fn.name + " (" + std::string(to_string(fn.kind)) + ", " +
            std::string(to_string(fn.visibility)) + "), lines " + std::to_string(fn.start_line) +
            "-" + std::to_string(fn.end_line) + "\n";
    user += "Called functions: " + join_or_none(meta.called_functions) + "\n";
    user += "Referenced state variables: " + join_or_none(meta.referenced_state_vars) + "\n";
    user += "Triggered events: " + join_or_none(meta.triggered_events) + "\n\n";
    user += "Code under review:\n```solidity\n" + slice.assembled_text + "\n```\n\n";
    if (retrieved.empty()) {
        user += "Retrieved bad-practice exemplars: none\n\n";
    } else {
        user += "Retrieved bad-practice exemplars, most similar first:\n";
        for (std::size_t i = 0; i < retrieved.size(); ++i) {
            const auto& hit = retrieved[i];
            const std::vector<std::string> tags(hit.entry->metadata.swc_types.begin(),
                                                hit.entry->metadata.swc_types.end());
            user += "### Exemplar " + std::to_string(i + 1) + ": " + hit.entry->entry_id + " [" +
                    join(tags, ", ") + "] similarity " + format_similarity(hit.similarity) + "\n";
            user += "```solidity\n" + hit.entry->slice_text + "\n```\n";
        }
        user += "\n";
    }
    user += kOutputSchema;
    return prompt;
}

ParsedFindings parse_findings(std::string_view response, LayerId layer,
                              const SeverityTable& table) {
    ParsedFindings out;
    const std::string_view body = trim(response);
    if (body.empty() || body == "[]") return out;
    const auto array = extract_array(body);
    if (!array) throw Error(ErrorKind::MalformedResponse, "no JSON array in response");
    for (std::size_t i = 0; i < array->size(); ++i) {
        try {
            out.findings.push_back(parse_item((*array)[i], layer, table, out.warnings));
        } catch (const std::exception& e) {
            out.warnings.push_back("dropped finding " + std::to_string(i) + ": " + e.what());
        }
    }
    if (out.findings.empty() && !array->empty()) {
        throw Error(ErrorKind::MalformedResponse,
                    "none of " + std::to_string(array->size()) + " findings parsed");
    }
    return out;
}

LayerRun run_layer(const Layer& layer, const ContextSlice& slice,
                   const std::vector<RetrievalHit>& retrieved, const LlmProvider& provider,
                   const SeverityTable& table) {
    LayerRun run;
    auto& ex = run.exchange;
    ex.layer = layer.id;
    ex.provider = provider.name();
    Prompt prompt = build_prompt(layer, slice, retrieved);
    ex.system_prompt = std::move(prompt.system);
    ex.user_prompt = std::move(prompt.user);
    const auto started = std::chrono::steady_clock::now();
    ex.raw_response = provider.complete({ex.system_prompt, ex.user_prompt});
    ex.duration = std::chrono::steady_clock::now() - started;
    ParsedFindings parsed = parse_findings(ex.raw_response, layer.id, table);
    for (const auto& w : parsed.warnings) {
        spdlog::warn("{} layer, function {}: {}", layer.title, slice.main_function.name, w);
    }
    ex.parsed = parsed.findings;
    ex.warnings = std::move(parsed.warnings);
    run.findings = std::move(parsed.findings);
    return run;
}

double aggregate_layer_severity(const std::vector<LayerFinding>& findings, LayerId layer,
                                Aggregation aggregation) {
    double best = 0.0;
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& f : findings) {
        if (f.layer != layer) continue;
        best = std::max(best, f.severity);
        sum += f.severity;
        ++count;
    }
    if (count == 0) return 0.0;
    return aggregation == Aggregation::Max ? best : sum / static_cast<double>(count);
}

double risk_score(const std::map<LayerId, double>& layer_severity,
                  const std::optional<LayerWeights>& weights) {
    std::array<double, 3> s{};
    for (const auto& l : kLayers) {
        const auto it = layer_severity.find(l.id);
        if (it == layer_severity.end()) {
            throw Error(ErrorKind::MissingLayer, "no severity for layer " + std::string(l.title));
        }
        s[static_cast<std::size_t>(l.id)] = it->second;
    }
    if (!weights) {
        // Summing in sorted order makes the result independent of layer order.
        std::sort(s.begin(), s.end());
        return (s[0] + s[1] + s[2]) / 3.0;
    }
    const auto& w = *weights;
    double weight_sum = 0.0;
    for (const double x : w) {
        if (!std::isfinite(x) || x < 0.0) throw Error(ErrorKind::InvalidConfig, "layer weights must be >= 0");
        weight_sum += x;
    }
    if (weight_sum <= 0.0) throw Error(ErrorKind::InvalidConfig, "layer weights sum to zero");
    return (w[0] * s[0] + w[1] * s[1] + w[2] * s[2]) / weight_sum;
}

std::set<std::string> confirmed_swc_ids(const FunctionAudit& audit) {
    std::set<std::string> ids;
    for (const auto& f : audit.findings) {
        if (f.swc_id) ids.insert(*f.swc_id);
    }
    return ids;
}

std::vector<RetrievalHit> retrieve(const VectorStore& kb, const EmbeddingVector& probe,
                                   std::size_t top_k, Threshold threshold) {
    if (kb.size() == 0 || top_k == 0) return {};
    auto hits = kb.query_top_k(probe, top_k);
    std::erase_if(hits, [&](const RetrievalHit& h) { return !(h.similarity > threshold.theta); });
    return hits;
}

FunctionAudit verify_with_hits(const ContextSlice& slice, std::vector<RetrievalHit> retrieved,
                               const LlmProvider& provider, const VerifierOptions& options) {
    FunctionAudit audit;
    audit.function_name = slice.main_function.name;
    audit.start_line = slice.main_function.start_line;
    audit.end_line = slice.main_function.end_line;
    audit.retrieved = std::move(retrieved);
    for (const auto& l : kLayers) {
        try {
            LayerRun run = run_layer(l, slice, audit.retrieved, provider, options.severity);
            audit.findings.insert(audit.findings.end(), run.findings.begin(), run.findings.end());
            audit.exchanges.push_back(std::move(run.exchange));
        } catch (const std::exception& e) {
            spdlog::error("{} layer failed for {}: {}", l.title, slice.main_function.name, e.what());
            audit.errors.push_back(std::string(to_string(l.id)) + ": " + e.what());
            LlmExchange failed;
            failed.layer = l.id;
            failed.provider = provider.name();
            failed.error = e.what();
            audit.exchanges.push_back(std::move(failed));
        }
        audit.layer_severity[l.id] =
            aggregate_layer_severity(audit.findings, l.id, options.aggregation);
    }
    audit.risk_score = solaudit::risk_score(audit.layer_severity, options.weights);
    return audit;
}

FunctionAudit verify_function(const ContextSlice& slice, const VectorStore& kb,
                              const EmbeddingProvider& embedder, const LlmProvider& provider,
                              const VerifierOptions& options) {
    std::vector<RetrievalHit> hits;
    std::optional<std::string> retrieval_error;
    try {
        hits = retrieve(kb, embedder.embed(slice.assembled_text), options.top_k, options.threshold);
    } catch (const std::exception& e) {
        spdlog::error("retrieval failed for {}: {}", slice.main_function.name, e.what());
        retrieval_error = std::string("retrieval: ") + e.what();
    }
    FunctionAudit audit = verify_with_hits(slice, std::move(hits), provider, options);
    if (retrieval_error) audit.errors.insert(audit.errors.begin(), *retrieval_error);
    return audit;
}

std::vector<FunctionAudit> verify_functions(const std::vector<ContextSlice>& slices,
                                            const VectorStore& kb,
                                            const EmbeddingProvider& embedder,
                                            const LlmProvider& provider,
                                            const VerifierOptions& options) {
    std::vector<FunctionAudit> audits(slices.size());
    const std::size_t workers =
        std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(slices.size(), 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < slices.size(); ++i) {
            audits[i] = verify_function(slices[i], kb, embedder, provider, options);
        }
        return audits;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < slices.size(); i = next++) {
                    audits[i] = verify_function(slices[i], kb, embedder, provider, options);
                }
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return audits;
}

}  // namespace solaudit
