#pragma once

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

namespace solaudit {

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

// Minimal POST-JSON transport used by the remote providers.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;

    // Throws Error{ProviderUnavailable} when no response could be obtained.
    virtual HttpResponse post_json(const std::string& url, const std::string& body,
                                   const HttpHeaders& headers,
                                   std::chrono::milliseconds timeout) = 0;
};

std::shared_ptr<HttpTransport> make_http_transport();

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff{250};  // doubled after every failed attempt
    std::chrono::milliseconds timeout{30000};
};

// Caps the number of concurrent requests issued through it.
class RequestLimiter {
public:
    explicit RequestLimiter(std::size_t max_in_flight);

    void acquire() { slots_.acquire(); }
    void release() { slots_.release(); }

private:
    std::counting_semaphore<1024> slots_;
};

// POSTs until a 200 arrives. Transport failures, 429 and 5xx are retried with
// exponential backoff; other statuses fail immediately. Throws
// Error{ProviderUnavailable} when retries are exhausted.
HttpResponse post_with_retries(HttpTransport& transport, RequestLimiter& limiter,
                               const RetryPolicy& policy, const std::string& url,
                               const std::string& body, const HttpHeaders& headers);

// Adds a bearer Authorization header when the environment variable is set.
void add_bearer_from_env(HttpHeaders& headers, const std::string& env_var);

}  // namespace solaudit
