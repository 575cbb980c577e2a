#include "solaudit/http_transport.hpp"

#include "solaudit/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace solaudit {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorKind::InvalidConfig, "endpoint is not an absolute URL: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
public:
    HttpResponse post_json(const std::string& url, const std::string& body,
                           const HttpHeaders& headers,
                           std::chrono::milliseconds timeout) override {
        const SplitUrl parts = split_url(url);
        httplib::Client client(parts.origin);
        if (!client.is_valid()) {
            throw Error(ErrorKind::ProviderUnavailable, "unsupported endpoint: " + parts.origin);
        }
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        httplib::Headers hdrs;
        for (const auto& [key, value] : headers) hdrs.emplace(key, value);
        auto result = client.Post(parts.path, hdrs, body, "application/json");
        if (!result) {
            throw Error(ErrorKind::ProviderUnavailable,
                        parts.origin + ": " + httplib::to_string(result.error()));
        }
        return HttpResponse{result->status, result->body};
    }
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() {
    return std::make_shared<HttplibTransport>();
}

RequestLimiter::RequestLimiter(std::size_t max_in_flight)
    : slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(max_in_flight, 1, 1024))) {}

HttpResponse post_with_retries(HttpTransport& transport, RequestLimiter& limiter,
                               const RetryPolicy& policy, const std::string& url,
                               const std::string& body, const HttpHeaders& headers) {
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(policy.backoff * (1LL << (attempt - 1)));
        HttpResponse response;
        limiter.acquire();
        try {
            response = transport.post_json(url, body, headers, policy.timeout);
        } catch (const Error& e) {
            limiter.release();
            last_error = e.what();
            spdlog::warn("request to {} failed (attempt {}): {}", url, attempt + 1, last_error);
            continue;
        }
        limiter.release();
        if (response.status == 200) return response;
        last_error = "HTTP status " + std::to_string(response.status);
        if (response.status != 429 && response.status < 500) break;
        spdlog::warn("request to {} failed (attempt {}): {}", url, attempt + 1, last_error);
    }
    throw Error(ErrorKind::ProviderUnavailable, url + ": " + last_error);
}

void add_bearer_from_env(HttpHeaders& headers, const std::string& env_var) {
    if (env_var.empty()) return;
    const char* key = std::getenv(env_var.c_str());
    if (key != nullptr && *key != 0) headers.emplace_back("Authorization", std::string("Bearer ") + key);
}

}  // namespace solaudit
