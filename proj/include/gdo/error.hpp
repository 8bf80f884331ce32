#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace gdo {

enum class ErrorCode {
    parse_error,          // malformed document (table, manifest, fixture, report)
    coercion_error,       // cell text does not parse as the declared kind
    render_error,         // template rendering failed
    precondition,         // caller violated an operation precondition
    oracle_error,         // deterministic oracle rejected its input
    backend_unavailable,  // transport failure after retries, or store I/O failure
    fixture_miss,         // mock backend has no entry for the prompt
    unknown_oracle,       // rule backend asked to run an oracle it does not know
    protocol_error,       // remote response body does not match the wire schema
    io_error,             // file system failure
    run_aborted,          // fail policy stopped the run on a contract violation
};

const char* to_string(ErrorCode code);

/// Engine-wide exception. Backend errors additionally carry the request's
/// cache key (hex) for diagnostics.
class GdoError : public std::runtime_error {
public:
    GdoError(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code),
          message_(message) {}

    GdoError(ErrorCode code, const std::string& message, std::string cache_key_hex)
        : std::runtime_error(std::string(to_string(code)) + ": " + message +
                             " [cache_key=" + cache_key_hex + "]"),
          code_(code),
          message_(message),
          cache_key_hex_(std::move(cache_key_hex)) {}

    ErrorCode code() const { return code_; }
    const std::string& message() const { return message_; }
    const std::optional<std::string>& cache_key_hex() const { return cache_key_hex_; }

private:
    ErrorCode code_;
    std::string message_;
    std::optional<std::string> cache_key_hex_;
};

}  // namespace gdo
