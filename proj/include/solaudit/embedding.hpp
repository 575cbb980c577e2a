#pragma once

#include "solaudit/http_transport.hpp"

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace solaudit {

// A finite, non-zero vector. Construction validates both properties.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t dim() const noexcept { return values_.size(); }
    double norm() const noexcept;

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
};

enum class ProviderKind { Remote, LocalDeterministic };

struct ProviderConfig {
    ProviderKind kind = ProviderKind::LocalDeterministic;
    std::optional<std::string> endpoint;
    std::optional<std::string> model_name;
    std::size_t dim = 1536;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{250};
    std::size_t max_in_flight = 4;
    std::size_t batch_size = 64;
    // Environment variable holding the API key for remote providers.
    std::string api_key_env = "SOLAUDIT_API_KEY";
    // Local provider only: drop comments before tokenizing.
    bool strip_comments = false;

    // Throws Error{InvalidConfig}.
    void validate() const;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual EmbeddingVector embed(std::string_view text) const = 0;
    // Element-wise equal to embed() over `texts`; failures raise BatchError
    // carrying the index of the first failing item.
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const;
    virtual std::size_t dim() const noexcept = 0;
    virtual std::string name() const = 0;
};

// Bag-of-tokens hashing embedder. Tokens are maximal runs of ASCII letters and
// digits; each token is hashed with 64-bit FNV-1a (standard offset basis) over
// its UTF-8 bytes, counted into bucket `hash % dim`, and the count vector is
// L2-normalized. A pure function of (text, dim, strip_comments).
class LocalEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit LocalEmbeddingProvider(std::size_t dim, bool strip_comments = false);

    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dim() const noexcept override { return dim_; }
    std::string name() const override { return "local-hash"; }

private:
    std::size_t dim_;
    bool strip_comments_;
};

// Client for {"model", "input": [...]} -> {"data": [{"embedding": [...]}]}.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
    RemoteEmbeddingProvider(ProviderConfig config, std::shared_ptr<HttpTransport> transport);
    ~RemoteEmbeddingProvider() override;

    EmbeddingVector embed(std::string_view text) const override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override;
    std::size_t dim() const noexcept override { return config_.dim; }
    std::string name() const override;

private:
    std::vector<EmbeddingVector> request(const std::vector<std::string>& texts,
                                         std::size_t first_index) const;

    ProviderConfig config_;
    std::shared_ptr<HttpTransport> transport_;
    std::unique_ptr<RequestLimiter> limiter_;
};

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const ProviderConfig& config, std::shared_ptr<HttpTransport> transport = nullptr);

EmbeddingVector embed(std::string_view text, const ProviderConfig& config);
std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts,
                                         const ProviderConfig& config);

}  // namespace solaudit
