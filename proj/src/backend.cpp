#include "gdo/backend.hpp"

#include <chrono>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"

#include "gdo/error.hpp"
#include "gdo/table_io.hpp"

namespace gdo {

namespace {

using ordered_json = nlohmann::ordered_json;

void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void append_lp_string(std::string& out, const std::string& s) {
    append_u64(out, s.size());
    out += s;
}

void validate_request(const BackendRequest& request) {
    if (request.prompt.empty()) {
        throw GdoError(ErrorCode::precondition, "backend request prompt must be non-empty");
    }
    if (request.decode.temperature < 0) {
        throw GdoError(ErrorCode::precondition, "temperature must be >= 0");
    }
    if (request.decode.max_tokens < 1) {
        throw GdoError(ErrorCode::precondition, "max_tokens must be positive");
    }
}

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

bool is_error_text(const std::string& text) { return text.rfind("ERROR:", 0) == 0; }

// --- mock ------------------------------------------------------------------

class MockBackend final : public Backend {
public:
    explicit MockBackend(const std::string& fixture_document) {
        ordered_json doc;
        try {
            doc = ordered_json::parse(fixture_document);
        } catch (const ordered_json::exception& e) {
            throw GdoError(ErrorCode::parse_error, std::string("fixture: ") + e.what());
        }
        if (!doc.is_object()) {
            throw GdoError(ErrorCode::parse_error, "fixture: document must be an object");
        }
        for (const auto& [key, value] : doc.items()) {
            Entry entry;
            if (value.is_string()) {
                entry.responses.push_back(value.get<std::string>());
            } else if (value.is_array() && !value.empty()) {
                for (const auto& elem : value) {
                    if (!elem.is_string()) {
                        throw GdoError(ErrorCode::parse_error,
                                       "fixture: responses for '" + key + "' must be strings");
                    }
                    entry.responses.push_back(elem.get<std::string>());
                }
            } else {
                throw GdoError(ErrorCode::parse_error,
                               "fixture: '" + key + "' must map to a string or non-empty list");
            }
            entries_.emplace(key, std::move(entry));
        }
    }

    BackendResponse complete(const BackendRequest& request) override {
        validate_request(request);
        const auto start = now_ms();
        std::lock_guard lock(mutex_);
        Entry* entry = find_entry(request.prompt);
        if (entry == nullptr) {
            throw GdoError(ErrorCode::fixture_miss, "no fixture entry for prompt",
                           cache_key_hex(cache_key(request)));
        }
        // successive calls pop successive entries; the last one repeats
        const std::string& text = entry->responses[entry->next];
        if (entry->next + 1 < entry->responses.size()) ++entry->next;
        BackendResponse response;
        response.text = text;
        response.latency_ms = now_ms() - start;
        return response;
    }

private:
    struct Entry {
        std::vector<std::string> responses;
        std::size_t next = 0;
    };

    Entry* find_entry(const std::string& prompt) {
        auto it = entries_.find(prompt);
        if (it != entries_.end()) return &it->second;
        // repair prompts extend the original prompt; match the longest prefix
        Entry* best = nullptr;
        std::size_t best_len = 0;
        for (auto& [key, entry] : entries_) {
            if (key.size() >= best_len && key.size() <= prompt.size() &&
                prompt.compare(0, key.size(), key) == 0) {
                best = &entry;
                best_len = key.size();
            }
        }
        return best;
    }

    std::mutex mutex_;
    std::map<std::string, Entry> entries_;
};

// --- rule ------------------------------------------------------------------

class RuleBackend final : public Backend {
public:
    explicit RuleBackend(std::optional<Taxonomy> taxonomy) : taxonomy_(std::move(taxonomy)) {}

    BackendResponse complete(const BackendRequest& request) override {
        validate_request(request);
        const auto start = now_ms();
        if (!request.oracle) {
            throw GdoError(ErrorCode::unknown_oracle, "rule backend requires an oracle tag",
                           cache_key_hex(cache_key(request)));
        }
        BackendResponse response;
        try {
            response = run_oracle(request);
        } catch (const GdoError& e) {
            if (e.code() != ErrorCode::oracle_error) throw;
            response.text = "ERROR: " + e.message();
            response.note.reset();
        }
        response.latency_ms = now_ms() - start;
        return response;
    }

private:
    static const std::string& input_at(const BackendRequest& request, std::size_t index,
                                       const char* what) {
        if (index >= request.structured_inputs.size()) {
            throw GdoError(ErrorCode::oracle_error, std::string("missing input: ") + what);
        }
        return request.structured_inputs[index].second;
    }

    static double param_real(const BackendRequest& request, const std::string& name) {
        auto it = request.params.find(name);
        if (it == request.params.end()) {
            throw GdoError(ErrorCode::oracle_error, "missing param '" + name + "'");
        }
        try {
            Value v = coerce_value(it->second, ValueKind::Real);
            if (v.is_null()) throw GdoError(ErrorCode::oracle_error, "empty param '" + name + "'");
            return v.as_real();
        } catch (const GdoError& e) {
            if (e.code() == ErrorCode::oracle_error) throw;
            throw GdoError(ErrorCode::oracle_error,
                           "param '" + name + "': '" + it->second + "' is not a number");
        }
    }

    static std::int64_t param_int(const BackendRequest& request, const std::string& name) {
        auto it = request.params.find(name);
        if (it == request.params.end()) {
            throw GdoError(ErrorCode::oracle_error, "missing param '" + name + "'");
        }
        try {
            Value v = coerce_value(it->second, ValueKind::Integer);
            if (v.is_null()) throw GdoError(ErrorCode::oracle_error, "empty param '" + name + "'");
            return v.as_integer();
        } catch (const GdoError& e) {
            if (e.code() == ErrorCode::oracle_error) throw;
            throw GdoError(ErrorCode::oracle_error,
                           "param '" + name + "': '" + it->second + "' is not an integer");
        }
    }

    BackendResponse run_oracle(const BackendRequest& request) const {
        BackendResponse response;
        switch (*request.oracle) {
            case OracleTag::date_normalize:
                response.text = date_normalize(input_at(request, 0, "date text"));
                break;
            case OracleTag::to_unix_epoch:
                response.text = std::to_string(to_unix_epoch(input_at(request, 0, "YYYYMMDD text")));
                break;
            case OracleTag::normalize_rating: {
                const std::string& raw = input_at(request, 0, "rating");
                double x = 0;
                try {
                    Value v = coerce_value(raw, ValueKind::Real);
                    if (v.is_null()) throw GdoError(ErrorCode::oracle_error, "empty rating");
                    x = v.as_real();
                } catch (const GdoError& e) {
                    if (e.code() == ErrorCode::oracle_error) throw;
                    throw GdoError(ErrorCode::oracle_error, "'" + raw + "' is not a number");
                }
                const double lo = param_real(request, "lo");
                const double hi = param_real(request, "hi");
                response.text = format_real(normalize_rating(x, lo, hi));
                break;
            }
            case OracleTag::classify_item_type: {
                if (!taxonomy_) {
                    throw GdoError(ErrorCode::oracle_error, "no taxonomy configured");
                }
                const std::string& name = input_at(request, 0, "item name");
                const std::string& current = input_at(request, 1, "current type");
                const Classification result = classify_item_type(name, current, *taxonomy_);
                response.text = result.type + "\t" + (result.corrected ? "true" : "false");
                if (!result.verified) response.note = "unverified";
                break;
            }
            case OracleTag::embed_text: {
                const std::int64_t dim = param_int(request, "dim");
                if (dim < 2) throw GdoError(ErrorCode::oracle_error, "dim must be at least 2");
                const auto vec =
                    embed_text(input_at(request, 0, "text"), static_cast<std::size_t>(dim));
                response.text = canonical_text(Value::vector(vec));
                break;
            }
        }
        return response;
    }

    std::optional<Taxonomy> taxonomy_;
};

// --- cached ----------------------------------------------------------------

class CachedBackend final : public Backend {
public:
    CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCacheStore> store)
        : inner_(std::move(inner)), store_(std::move(store)) {}

    BackendResponse complete(const BackendRequest& request) override {
        if (request.bypass_cache) {
            return inner_->complete(request);
        }
        const CacheKey key = cache_key(request);
        if (auto hit = store_->get(key)) {
            BackendResponse response;
            response.text = hit->text;
            response.usage = {hit->prompt_tokens, hit->completion_tokens};
            response.latency_ms = hit->latency_ms;
            response.cached = true;
            response.note = hit->note;
            return response;
        }
        BackendResponse response = inner_->complete(request);
        if (!is_error_text(response.text)) {
            store_->put(key, {response.text, response.usage.prompt_tokens,
                              response.usage.completion_tokens, response.latency_ms, response.note});
        }
        return response;
    }

private:
    std::shared_ptr<Backend> inner_;
    std::shared_ptr<ResponseCacheStore> store_;
};

}  // namespace

CacheKey cache_key(const BackendRequest& request) {
    // field-ordered, length-prefixed: injective on (model_id, prompt, decode)
    std::string buf;
    buf.reserve(request.model_id.size() + request.prompt.size() + 64);
    append_lp_string(buf, request.model_id);
    append_lp_string(buf, request.prompt);
    std::uint64_t temperature_bits = 0;
    static_assert(sizeof(temperature_bits) == sizeof(request.decode.temperature));
    std::memcpy(&temperature_bits, &request.decode.temperature, sizeof(temperature_bits));
    append_u64(buf, temperature_bits);
    append_u64(buf, static_cast<std::uint64_t>(request.decode.max_tokens));
    buf += static_cast<char>(request.decode.seed ? 1 : 0);
    append_u64(buf, request.decode.seed ? static_cast<std::uint64_t>(*request.decode.seed) : 0);

    CacheKey key{};
    unsigned int len = 0;
    EVP_Digest(buf.data(), buf.size(), key.data(), &len, EVP_sha256(), nullptr);
    return key;
}

std::shared_ptr<Backend> make_mock_backend(const std::string& fixture_document) {
    return std::make_shared<MockBackend>(fixture_document);
}

std::shared_ptr<Backend> make_mock_backend_from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw GdoError(ErrorCode::io_error, "cannot open fixture '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return make_mock_backend(buffer.str());
}

std::shared_ptr<Backend> make_rule_backend(std::optional<Taxonomy> taxonomy) {
    return std::make_shared<RuleBackend>(std::move(taxonomy));
}

std::shared_ptr<Backend> make_cached_backend(std::shared_ptr<Backend> inner,
                                             std::shared_ptr<ResponseCacheStore> store) {
    return std::make_shared<CachedBackend>(std::move(inner), std::move(store));
}

}  // namespace gdo
