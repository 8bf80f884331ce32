#include <chrono>
#include <random>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "gdo/backend.hpp"
#include "gdo/error.hpp"
#include "gdo/table_io.hpp"

namespace gdo {

namespace {

using njson = nlohmann::json;

std::string strip_trailing_slashes(std::string s) {
    while (!s.empty() && s.back() == '/') s.pop_back();
    return s;
}

/// Full jitter: uniform in [0, base * 2^attempt] milliseconds.
std::int64_t backoff_delay_ms(int base_ms, int attempt) {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::int64_t cap = static_cast<std::int64_t>(base_ms) << attempt;
    if (cap <= 0) return 0;
    std::uniform_int_distribution<std::int64_t> dist(0, cap);
    return dist(rng);
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status <= 599);
}

class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(RemoteOptions options) : options_(std::move(options)) {
        options_.endpoint = strip_trailing_slashes(options_.endpoint);
        if (options_.endpoint.empty())
            throw GdoError(ErrorCode::precondition, "remote endpoint is empty");
        if (options_.retry.max_attempts < 1)
            throw GdoError(ErrorCode::precondition, "retry.max_attempts must be >= 1");
    }

    BackendResponse complete(const BackendRequest& request) override {
        const std::string key_hex = cache_key_hex(cache_key(request));
        const std::string body = request_body(request);
        std::string last_failure = "no attempt made";

        for (int attempt = 0; attempt < options_.retry.max_attempts; ++attempt) {
            if (attempt > 0) {
                auto delay = backoff_delay_ms(options_.retry.base_backoff_ms, attempt - 1);
                std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            }

            // A client per call keeps complete() safe under concurrency; the
            // stub-scale workloads here do not miss connection reuse.
            httplib::Client client(options_.endpoint);
            client.set_connection_timeout(0, options_.timeout_ms * 1000);
            client.set_read_timeout(0, options_.timeout_ms * 1000);
            client.set_write_timeout(0, options_.timeout_ms * 1000);

            httplib::Headers headers;
            if (!options_.api_key.empty())
                headers.emplace("authorization", "Bearer " + options_.api_key);

            auto start = std::chrono::steady_clock::now();
            httplib::Result result = client.Post("/v1/complete", headers, body, "application/json");
            auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count();

            if (!result) {
                last_failure = "transport: " + httplib::to_string(result.error());
                continue;
            }
            if (result->status == 200) return parse_response(result->body, elapsed, key_hex);
            if (retryable_status(result->status)) {
                last_failure = "http status " + std::to_string(result->status);
                continue;
            }
            throw GdoError(ErrorCode::backend_unavailable,
                           "remote returned non-retryable status " +
                               std::to_string(result->status),
                           key_hex);
        }
        throw GdoError(ErrorCode::backend_unavailable,
                       "remote unavailable after " + std::to_string(options_.retry.max_attempts) +
                           " attempts (last: " + last_failure + ")",
                       key_hex);
    }

private:
    std::string request_body(const BackendRequest& request) const {
        njson body;
        body["model"] = request.model_id;
        body["prompt"] = request.prompt;
        body["temperature"] = request.decode.temperature;
        body["max_tokens"] = request.decode.max_tokens;
        if (request.decode.seed)
            body["seed"] = *request.decode.seed;
        else
            body["seed"] = nullptr;
        return body.dump();
    }

    static BackendResponse parse_response(const std::string& body, std::int64_t latency_ms,
                                          const std::string& key_hex) {
        njson parsed = njson::parse(body, nullptr, false);
        if (parsed.is_discarded())
            throw GdoError(ErrorCode::protocol_error, "response body is not JSON", key_hex);
        if (!parsed.is_object() || !parsed.contains("text") || !parsed["text"].is_string() ||
            !parsed.contains("usage") || !parsed["usage"].is_object())
            throw GdoError(ErrorCode::protocol_error,
                           "response body missing text/usage fields", key_hex);
        const njson& usage = parsed["usage"];
        if (!usage.contains("prompt_tokens") || !usage["prompt_tokens"].is_number_integer() ||
            !usage.contains("completion_tokens") ||
            !usage["completion_tokens"].is_number_integer())
            throw GdoError(ErrorCode::protocol_error, "usage token counts must be integers",
                           key_hex);

        BackendResponse response;
        response.text = parsed["text"].get<std::string>();
        if (!valid_utf8(response.text))
            throw GdoError(ErrorCode::protocol_error, "response text is not valid UTF-8",
                           key_hex);
        response.usage.prompt_tokens = usage["prompt_tokens"].get<std::int64_t>();
        response.usage.completion_tokens = usage["completion_tokens"].get<std::int64_t>();
        if (response.usage.prompt_tokens < 0 || response.usage.completion_tokens < 0)
            throw GdoError(ErrorCode::protocol_error, "usage token counts must be >= 0",
                           key_hex);
        response.latency_ms = latency_ms;
        return response;
    }

    RemoteOptions options_;
};

}  // namespace

std::shared_ptr<Backend> make_remote_backend(RemoteOptions options) {
    return std::make_shared<RemoteBackend>(std::move(options));
}

}  // namespace gdo
