#pragma once

#include <cstdint>
#include <optional>
#include <regex>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gdo/value.hpp"

namespace gdo {

// Machine-checkable output contracts. A backend answer either parses into a
// typed value or produces a Violation; check() never throws.

struct DateContract {};  // exactly 8 digits forming a valid Gregorian date

struct IntegerContract {
    std::optional<std::int64_t> min;
    std::optional<std::int64_t> max;
};

struct RealRangeContract {
    double lo;
    double hi;  // lo < hi
};

struct EnumContract {
    std::vector<std::string> allowed;  // stored sorted, unique, non-empty
};

struct PatternContract {
    std::string source;   // anchored at both ends when matching
    std::regex compiled;  // ECMAScript grammar
};

struct VectorContract {
    std::size_t dim;
    bool unit_norm = false;
    double norm_tol = 1e-9;
};

struct TabSeparatedContract {
    std::size_t n_fields;
};

using OutputContract = std::variant<DateContract, IntegerContract, RealRangeContract,
                                    EnumContract, PatternContract, VectorContract,
                                    TabSeparatedContract>;

// Stable machine codes for violation reasons; quarantine records are
// diffable across runs.
namespace reason {
inline constexpr const char* bad_format = "bad_format";
inline constexpr const char* out_of_range = "out_of_range";
inline constexpr const char* not_in_enum = "not_in_enum";
inline constexpr const char* bad_length = "bad_length";
inline constexpr const char* bad_separator = "bad_separator";
inline constexpr const char* not_a_number = "not_a_number";
inline constexpr const char* invalid_date = "invalid_date";
inline constexpr const char* backend_error = "backend_error";
}  // namespace reason

struct Violation {
    std::string reason_code;
    std::string message;               // human-readable detail
    std::string contract_description;  // describe(contract), verbatim in records
    std::string raw_text;              // the offending backend text

    bool operator==(const Violation&) const = default;
};

struct CheckResult {
    std::optional<Value> value;          // set iff passed
    std::optional<Violation> violation;  // set iff failed

    bool passed() const { return value.has_value(); }
};

/// Strip leading/trailing ASCII whitespace, then check `text` against the
/// contract. Text beginning "ERROR:" is a backend_error violation. Total:
/// every string maps to Pass or Violation.
CheckResult check(const OutputContract& contract, const std::string& text);

/// The exact stripping rule check() applies before matching; also the rule
/// golden-example comparison uses on both sides.
std::string strip_ascii_whitespace(const std::string& text);

/// Stable one-line description used in repair prompts and reports.
std::string describe(const OutputContract& contract);

/// Original prompt plus a fixed suffix naming the violation's reason code
/// and the contract description. Deterministic per (original, reason code,
/// contract).
std::string repair_prompt(const std::string& original, const Violation& violation, int attempt);

/// Column kind produced by a passing check.
ValueKind output_kind(const OutputContract& contract);

OutputContract contract_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json contract_to_json(const OutputContract& contract);

}  // namespace gdo
