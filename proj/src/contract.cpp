#include "gdo/contract.hpp"

#include <algorithm>
#include <cmath>

#include "gdo/error.hpp"
#include "gdo/civil.hpp"
#include "gdo/table_io.hpp"

namespace gdo {

std::string strip_ascii_whitespace(const std::string& text) {
    const char* ws = " \t\n\r\f\v";
    const auto begin = text.find_first_not_of(ws);
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(ws);
    return text.substr(begin, end - begin + 1);
}

namespace {

using ordered_json = nlohmann::ordered_json;

CheckResult fail(const OutputContract& contract, const std::string& stripped,
                 const char* code, std::string message) {
    CheckResult result;
    result.violation = Violation{code, std::move(message), describe(contract), stripped};
    return result;
}

CheckResult pass(Value v) {
    CheckResult result;
    result.value = std::move(v);
    return result;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        if (pos == std::string::npos) {
            fields.push_back(text.substr(start));
            return fields;
        }
        fields.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

struct Checker {
    const OutputContract& contract;
    const std::string& s;  // stripped text

    CheckResult operator()(const DateContract&) const {
        if (s.size() != 8 || !std::all_of(s.begin(), s.end(), [](unsigned char c) {
                return c >= '0' && c <= '9';
            })) {
            return fail(contract, s, reason::bad_format, "expected exactly 8 digits");
        }
        const int year = std::stoi(s.substr(0, 4));
        const int month = std::stoi(s.substr(4, 2));
        const int day = std::stoi(s.substr(6, 2));
        if (!civil::is_valid_date(year, month, day)) {
            return fail(contract, s, reason::invalid_date, "'" + s + "' is not a calendar date");
        }
        return pass(Value::text(s));
    }

    CheckResult operator()(const IntegerContract& c) const {
        std::int64_t v = 0;
        try {
            Value parsed = coerce_value(s, ValueKind::Integer);
            if (parsed.is_null()) {
                return fail(contract, s, reason::not_a_number, "empty response");
            }
            v = parsed.as_integer();
        } catch (const GdoError&) {
            return fail(contract, s, reason::not_a_number, "'" + s + "' is not an integer");
        }
        if ((c.min && v < *c.min) || (c.max && v > *c.max)) {
            return fail(contract, s, reason::out_of_range, "'" + s + "' is outside the allowed range");
        }
        return pass(Value::integer(v));
    }

    CheckResult operator()(const RealRangeContract& c) const {
        double v = 0;
        try {
            Value parsed = coerce_value(s, ValueKind::Real);
            if (parsed.is_null()) {
                return fail(contract, s, reason::not_a_number, "empty response");
            }
            v = parsed.as_real();
        } catch (const GdoError&) {
            return fail(contract, s, reason::not_a_number, "'" + s + "' is not a number");
        }
        if (v < c.lo || v > c.hi) {
            return fail(contract, s, reason::out_of_range,
                        "'" + s + "' is outside [" + format_real(c.lo) + ", " + format_real(c.hi) + "]");
        }
        return pass(Value::real(v));
    }

    CheckResult operator()(const EnumContract& c) const {
        if (!std::binary_search(c.allowed.begin(), c.allowed.end(), s)) {
            return fail(contract, s, reason::not_in_enum, "'" + s + "' is not an allowed value");
        }
        return pass(Value::text(s));
    }

    CheckResult operator()(const PatternContract& c) const {
        if (!std::regex_match(s, c.compiled)) {
            return fail(contract, s, reason::bad_format, "does not match the required pattern");
        }
        return pass(Value::text(s));
    }

    CheckResult operator()(const VectorContract& c) const {
        std::vector<double> v;
        try {
            Value parsed = coerce_value(s, ValueKind::Vector);
            if (parsed.is_null()) {
                return fail(contract, s, reason::bad_format, "empty response");
            }
            v = parsed.as_vector();
        } catch (const GdoError&) {
            return fail(contract, s, reason::bad_format, "not a [v1,v2,...] vector");
        }
        if (v.size() != c.dim) {
            return fail(contract, s, reason::bad_length,
                        "expected " + std::to_string(c.dim) + " components, got " +
                            std::to_string(v.size()));
        }
        if (c.unit_norm) {
            double sq = 0;
            for (double x : v) sq += x * x;
            const double norm = std::sqrt(sq);
            if (std::fabs(norm - 1.0) > c.norm_tol) {
                return fail(contract, s, reason::out_of_range,
                            "L2 norm " + format_real(norm) + " deviates from 1 beyond tolerance");
            }
        }
        return pass(Value::vector(std::move(v)));
    }

    CheckResult operator()(const TabSeparatedContract& c) const {
        const auto fields = split_on(s, '\t');
        if (fields.size() == c.n_fields) {
            return pass(Value::text(s));
        }
        for (char alt : {',', ';', '|'}) {
            if (split_on(s, alt).size() == c.n_fields) {
                return fail(contract, s, reason::bad_separator,
                            std::string("fields separated by '") + alt + "' instead of tabs");
            }
        }
        return fail(contract, s, reason::bad_length,
                    "expected " + std::to_string(c.n_fields) + " fields, got " +
                        std::to_string(fields.size()));
    }
};

}  // namespace

CheckResult check(const OutputContract& contract, const std::string& text) {
    const std::string stripped = strip_ascii_whitespace(text);
    if (stripped.rfind("ERROR:", 0) == 0) {
        return fail(contract, stripped, reason::backend_error, stripped);
    }
    return std::visit(Checker{contract, stripped}, contract);
}

std::string describe(const OutputContract& contract) {
    struct Describer {
        std::string operator()(const DateContract&) const {
            return "an 8-digit date in YYYYMMDD form";
        }
        std::string operator()(const IntegerContract& c) const {
            if (c.min && c.max) {
                return "an integer between " + std::to_string(*c.min) + " and " +
                       std::to_string(*c.max) + " inclusive";
            }
            if (c.min) return "an integer at least " + std::to_string(*c.min);
            if (c.max) return "an integer at most " + std::to_string(*c.max);
            return "an integer";
        }
        std::string operator()(const RealRangeContract& c) const {
            return "a decimal number between " + format_real(c.lo) + " and " + format_real(c.hi) +
                   " inclusive";
        }
        std::string operator()(const EnumContract& c) const {
            std::string out = "one of:";
            for (std::size_t i = 0; i < c.allowed.size(); ++i) {
                out += (i == 0 ? " " : ", ") + c.allowed[i];
            }
            return out;
        }
        std::string operator()(const PatternContract& c) const {
            return "text fully matching the pattern " + c.source;
        }
        std::string operator()(const VectorContract& c) const {
            std::string out = "a bracketed vector of " + std::to_string(c.dim) + " decimal numbers";
            if (c.unit_norm) out += " with unit L2 norm";
            return out;
        }
        std::string operator()(const TabSeparatedContract& c) const {
            return "exactly " + std::to_string(c.n_fields) +
                   " fields separated by single tab characters";
        }
    };
    return std::visit(Describer{}, contract);
}

std::string repair_prompt(const std::string& original, const Violation& violation, int attempt) {
    if (attempt < 1) {
        throw GdoError(ErrorCode::precondition, "repair attempt must be positive");
    }
    return original + "\n\nYour previous answer was invalid: " + violation.reason_code +
           ". Answer again with ONLY a value matching: " + violation.contract_description + ".";
}

ValueKind output_kind(const OutputContract& contract) {
    struct Kinder {
        ValueKind operator()(const DateContract&) const { return ValueKind::Text; }
        ValueKind operator()(const IntegerContract&) const { return ValueKind::Integer; }
        ValueKind operator()(const RealRangeContract&) const { return ValueKind::Real; }
        ValueKind operator()(const EnumContract&) const { return ValueKind::Text; }
        ValueKind operator()(const PatternContract&) const { return ValueKind::Text; }
        ValueKind operator()(const VectorContract&) const { return ValueKind::Vector; }
        ValueKind operator()(const TabSeparatedContract&) const { return ValueKind::Text; }
    };
    return std::visit(Kinder{}, contract);
}

OutputContract contract_from_json(const ordered_json& doc) {
    if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
        throw GdoError(ErrorCode::parse_error, "contract: missing 'kind'");
    }
    const std::string kind = doc["kind"].get<std::string>();
    if (kind == "date_yyyymmdd") {
        return DateContract{};
    }
    if (kind == "integer") {
        IntegerContract c;
        if (doc.contains("min")) c.min = doc["min"].get<std::int64_t>();
        if (doc.contains("max")) c.max = doc["max"].get<std::int64_t>();
        if (c.min && c.max && *c.min > *c.max) {
            throw GdoError(ErrorCode::parse_error, "contract: integer min > max");
        }
        return c;
    }
    if (kind == "real_range") {
        if (!doc.contains("lo") || !doc.contains("hi")) {
            throw GdoError(ErrorCode::parse_error, "contract: real_range needs 'lo' and 'hi'");
        }
        RealRangeContract c{doc["lo"].get<double>(), doc["hi"].get<double>()};
        if (!(c.lo < c.hi)) {
            throw GdoError(ErrorCode::parse_error, "contract: real_range requires lo < hi");
        }
        return c;
    }
    if (kind == "enum") {
        if (!doc.contains("allowed") || !doc["allowed"].is_array() || doc["allowed"].empty()) {
            throw GdoError(ErrorCode::parse_error, "contract: enum needs a non-empty 'allowed' list");
        }
        EnumContract c;
        for (const auto& elem : doc["allowed"]) c.allowed.push_back(elem.get<std::string>());
        std::sort(c.allowed.begin(), c.allowed.end());
        if (std::adjacent_find(c.allowed.begin(), c.allowed.end()) != c.allowed.end()) {
            throw GdoError(ErrorCode::parse_error, "contract: enum values must be distinct");
        }
        return c;
    }
    if (kind == "pattern") {
        if (!doc.contains("regex") || !doc["regex"].is_string()) {
            throw GdoError(ErrorCode::parse_error, "contract: pattern needs 'regex'");
        }
        PatternContract c;
        c.source = doc["regex"].get<std::string>();
        try {
            c.compiled = std::regex(c.source);
        } catch (const std::regex_error& e) {
            throw GdoError(ErrorCode::parse_error,
                           "contract: regex does not compile: " + std::string(e.what()));
        }
        return c;
    }
    if (kind == "vector") {
        if (!doc.contains("dim")) {
            throw GdoError(ErrorCode::parse_error, "contract: vector needs 'dim'");
        }
        VectorContract c;
        const auto dim = doc["dim"].get<std::int64_t>();
        if (dim < 1) throw GdoError(ErrorCode::parse_error, "contract: vector dim must be positive");
        c.dim = static_cast<std::size_t>(dim);
        if (doc.contains("unit_norm")) c.unit_norm = doc["unit_norm"].get<bool>();
        if (doc.contains("norm_tol")) {
            c.norm_tol = doc["norm_tol"].get<double>();
            if (c.norm_tol < 0) {
                throw GdoError(ErrorCode::parse_error, "contract: norm_tol must be non-negative");
            }
        }
        return c;
    }
    if (kind == "tab_separated") {
        if (!doc.contains("n_fields")) {
            throw GdoError(ErrorCode::parse_error, "contract: tab_separated needs 'n_fields'");
        }
        const auto n = doc["n_fields"].get<std::int64_t>();
        if (n < 1) {
            throw GdoError(ErrorCode::parse_error, "contract: n_fields must be positive");
        }
        return TabSeparatedContract{static_cast<std::size_t>(n)};
    }
    throw GdoError(ErrorCode::parse_error, "contract: unknown kind '" + kind + "'");
}

ordered_json contract_to_json(const OutputContract& contract) {
    struct Writer {
        ordered_json operator()(const DateContract&) const {
            return {{"kind", "date_yyyymmdd"}};
        }
        ordered_json operator()(const IntegerContract& c) const {
            ordered_json j{{"kind", "integer"}};
            if (c.min) j["min"] = *c.min;
            if (c.max) j["max"] = *c.max;
            return j;
        }
        ordered_json operator()(const RealRangeContract& c) const {
            return {{"kind", "real_range"}, {"lo", c.lo}, {"hi", c.hi}};
        }
        ordered_json operator()(const EnumContract& c) const {
            return {{"kind", "enum"}, {"allowed", c.allowed}};
        }
        ordered_json operator()(const PatternContract& c) const {
            return {{"kind", "pattern"}, {"regex", c.source}};
        }
        ordered_json operator()(const VectorContract& c) const {
            return {{"kind", "vector"},
                    {"dim", c.dim},
                    {"unit_norm", c.unit_norm},
                    {"norm_tol", c.norm_tol}};
        }
        ordered_json operator()(const TabSeparatedContract& c) const {
            return {{"kind", "tab_separated"}, {"n_fields", c.n_fields}};
        }
    };
    return std::visit(Writer{}, contract);
}

}  // namespace gdo
