#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gdo/cache_store.hpp"
#include "gdo/manifest.hpp"
#include "gdo/oracle.hpp"

namespace gdo {

struct DecodeParams {
    double temperature = 0.0;  // engine default; a manifest may override
    int max_tokens = 256;
    std::optional<std::int64_t> seed;
};

/// One llm_call exchange: the rendered prompt plus enough structure for the
/// rule backend to run its oracle without re-parsing the prompt.
struct BackendRequest {
    std::string model_id = "default";
    std::string prompt;  // non-empty
    std::vector<std::pair<std::string, std::string>> structured_inputs;  // manifest-input order
    std::optional<OracleTag> oracle;
    std::map<std::string, std::string> params;
    DecodeParams decode;
    bool bypass_cache = false;  // set for repair attempts
};

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct BackendResponse {
    std::string text;  // valid UTF-8; "ERROR:" prefix carries in-band oracle failures
    Usage usage;
    std::int64_t latency_ms = 0;
    bool cached = false;
    std::optional<std::string> note;  // e.g. "unverified" from the classify oracle
};

/// 256-bit digest of the field-ordered, length-prefixed serialization of
/// (model_id, prompt, decode params). Equal requests have equal keys.
CacheKey cache_key(const BackendRequest& request);

class Backend {
public:
    virtual ~Backend() = default;

    /// Must tolerate concurrent calls.
    virtual BackendResponse complete(const BackendRequest& request) = 0;
};

/// Replays a fixture mapping prompt-or-key -> list of responses. Successive
/// calls for the same key pop successive entries; the last entry repeats.
/// Lookup is exact-prompt first, then the longest key that is a prefix of
/// the prompt (so repair prompts reuse the original prompt's entry). A
/// prompt matching no key raises fixture_miss.
std::shared_ptr<Backend> make_mock_backend(const std::string& fixture_document);
std::shared_ptr<Backend> make_mock_backend_from_file(const std::filesystem::path& path);

/// Runs the request's oracle tag over structured_inputs, deterministically.
/// Oracle-level failures come back in-band as "ERROR: <message>" text so the
/// validator path is identical for every backend kind.
std::shared_ptr<Backend> make_rule_backend(std::optional<Taxonomy> taxonomy = std::nullopt);

struct RetryPolicy {
    int max_attempts = 3;
    int base_backoff_ms = 100;  // delay = base * 2^attempt, full jitter
};

struct RemoteOptions {
    std::string endpoint;  // e.g. http://127.0.0.1:8080
    std::string api_key;
    int timeout_ms = 30000;
    RetryPolicy retry;
};

/// HTTP client for POST {endpoint}/v1/complete. Retries transport failures
/// and 5xx/429 with exponential backoff and full jitter; other 4xx fail
/// immediately. At most retry.max_attempts transport calls per complete().
std::shared_ptr<Backend> make_remote_backend(RemoteOptions options);

/// Content-addressed read-through cache. Hits return the stored response
/// with cached=true and byte-identical text. "ERROR:"-prefixed responses are
/// never stored; bypass_cache requests go straight to the inner backend.
std::shared_ptr<Backend> make_cached_backend(std::shared_ptr<Backend> inner,
                                             std::shared_ptr<ResponseCacheStore> store);

}  // namespace gdo
