#include "solaudit/embedding.hpp"

#include "solaudit/error.hpp"
#include "solaudit/hash.hpp"
#include "solaudit/lexer.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace solaudit {

namespace {

constexpr bool is_ascii_alnum(char c) noexcept {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw Error(ErrorKind::DimensionMismatch, "empty embedding vector");
    bool any_nonzero = false;
    for (const double v : values_) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteValue, "embedding has NaN or Inf");
        any_nonzero = any_nonzero || v != 0.0;
    }
    if (!any_nonzero) throw Error(ErrorKind::ZeroVector, "embedding is all zeros");
}

double EmbeddingVector::norm() const noexcept {
    double sum = 0.0;
    for (const double v : values_) sum += v * v;
    return std::sqrt(sum);
}

void ProviderConfig::validate() const {
    if (dim < 8) throw Error(ErrorKind::InvalidConfig, "embedding dim must be >= 8");
    if (max_retries < 0) throw Error(ErrorKind::InvalidConfig, "max_retries must be >= 0");
    if (kind == ProviderKind::Remote) {
        if (!endpoint || endpoint->empty()) {
            throw Error(ErrorKind::InvalidConfig, "remote provider requires an endpoint");
        }
        if (!model_name || model_name->empty()) {
            throw Error(ErrorKind::InvalidConfig, "remote provider requires a model name");
        }
        if (max_in_flight == 0 || batch_size == 0) {
            throw Error(ErrorKind::InvalidConfig, "max_in_flight and batch_size must be >= 1");
        }
    }
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        try {
            out.push_back(embed(texts[i]));
        } catch (const Error& e) {
            throw BatchError(i, e);
        }
    }
    return out;
}

LocalEmbeddingProvider::LocalEmbeddingProvider(std::size_t dim, bool strip_comments)
    : dim_(dim), strip_comments_(strip_comments) {
    if (dim_ < 8) throw Error(ErrorKind::InvalidConfig, "embedding dim must be >= 8");
}

EmbeddingVector LocalEmbeddingProvider::embed(std::string_view text) const {
    if (text.empty()) throw Error(ErrorKind::EmptyText, "cannot embed empty text");
    std::string stripped;
    if (strip_comments_) {
        stripped = lex::strip_comments(text);
        text = stripped;
    }

    std::vector<double> counts(dim_, 0.0);
    std::size_t tokens = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_ascii_alnum(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_ascii_alnum(text[j])) ++j;
        counts[fnv1a64(text.substr(i, j - i)) % dim_] += 1.0;
        ++tokens;
        i = j;
    }
    if (tokens == 0) throw Error(ErrorKind::ZeroVector, "text contains no tokens");

    double sum_sq = 0.0;
    for (const double c : counts) sum_sq += c * c;
    const double inv = 1.0 / std::sqrt(sum_sq);
    for (double& c : counts) c *= inv;
    return EmbeddingVector(std::move(counts));
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(ProviderConfig config,
                                                 std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    config_.validate();
    if (!transport_) transport_ = make_http_transport();
    limiter_ = std::make_unique<RequestLimiter>(config_.max_in_flight);
}

RemoteEmbeddingProvider::~RemoteEmbeddingProvider() = default;

std::string RemoteEmbeddingProvider::name() const {
    return "remote:" + config_.model_name.value_or("");
}

EmbeddingVector RemoteEmbeddingProvider::embed(std::string_view text) const {
    if (text.empty()) throw Error(ErrorKind::EmptyText, "cannot embed empty text");
    try {
        return std::move(request({std::string(text)}, 0).front());
    } catch (const BatchError& e) {
        throw Error(e.cause_kind(), e.what());
    }
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) const {
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty()) {
            throw BatchError(i, Error(ErrorKind::EmptyText, "cannot embed empty text"));
        }
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += config_.batch_size) {
        const std::size_t stop = std::min(texts.size(), start + config_.batch_size);
        std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                       texts.begin() + static_cast<std::ptrdiff_t>(stop));
        auto vectors = request(chunk, start);
        std::move(vectors.begin(), vectors.end(), std::back_inserter(out));
    }
    return out;
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::request(
    const std::vector<std::string>& texts, std::size_t first_index) const {
    nlohmann::json payload;
    payload["model"] = *config_.model_name;
    payload["input"] = texts;
    const std::string body = payload.dump();

    HttpHeaders headers;
    add_bearer_from_env(headers, config_.api_key_env);
    const RetryPolicy policy{config_.max_retries, config_.retry_backoff, config_.timeout};
    const HttpResponse response =
        post_with_retries(*transport_, *limiter_, policy, *config_.endpoint, body, headers);

    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(response.body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ProviderUnavailable, std::string("unparseable response: ") + e.what());
    }
    if (!reply.contains("data") || !reply["data"].is_array() ||
        reply["data"].size() != texts.size()) {
        throw Error(ErrorKind::ProviderUnavailable, "response 'data' does not match request size");
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto& item = reply["data"][i];
        try {
            if (!item.contains("embedding") || !item["embedding"].is_array()) {
                throw Error(ErrorKind::ProviderUnavailable, "item without an embedding array");
            }
            std::vector<double> values;
            values.reserve(item["embedding"].size());
            for (const auto& v : item["embedding"]) {
                if (!v.is_number()) throw Error(ErrorKind::ProviderUnavailable, "non-numeric value");
                values.push_back(v.get<double>());
            }
            if (values.size() != config_.dim) {
                throw Error(ErrorKind::DimensionMismatch,
                            "expected " + std::to_string(config_.dim) + " values, got " +
                                std::to_string(values.size()));
            }
            out.emplace_back(std::move(values));
        } catch (const Error& e) {
            throw BatchError(first_index + i, e);
        }
    }
    return out;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const ProviderConfig& config, std::shared_ptr<HttpTransport> transport) {
    config.validate();
    if (config.kind == ProviderKind::Remote) {
        return std::make_unique<RemoteEmbeddingProvider>(config, std::move(transport));
    }
    return std::make_unique<LocalEmbeddingProvider>(config.dim, config.strip_comments);
}

EmbeddingVector embed(std::string_view text, const ProviderConfig& config) {
    return make_embedding_provider(config)->embed(text);
}

std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts,
                                         const ProviderConfig& config) {
    return make_embedding_provider(config)->embed_batch(texts);
}

}  // namespace solaudit
