#include "gdo/error.hpp"

namespace gdo {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::coercion_error: return "coercion_error";
        case ErrorCode::render_error: return "render_error";
        case ErrorCode::precondition: return "precondition";
        case ErrorCode::oracle_error: return "oracle_error";
        case ErrorCode::backend_unavailable: return "backend_unavailable";
        case ErrorCode::fixture_miss: return "fixture_miss";
        case ErrorCode::unknown_oracle: return "unknown_oracle";
        case ErrorCode::protocol_error: return "protocol_error";
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::run_aborted: return "run_aborted";
    }
    return "unknown_error";
}

}  // namespace gdo
