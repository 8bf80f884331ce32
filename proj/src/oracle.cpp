#include "gdo/oracle.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"

#include "gdo/civil.hpp"
#include "gdo/error.hpp"

namespace gdo {

namespace {

[[noreturn]] void fail_oracle(const std::string& message) {
    throw GdoError(ErrorCode::oracle_error, message);
}

bool ascii_alnum(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

constexpr std::array<const char*, 12> kMonthNames = {
    "january", "february", "march",     "april",   "may",      "june",
    "july",    "august",   "september", "october", "november", "december"};

int month_from_name(const std::string& token) {
    const std::string lowered = ascii_lower(token);
    for (int m = 0; m < 12; ++m) {
        const std::string full = kMonthNames[m];
        if (lowered == full || lowered == full.substr(0, 3)) return m + 1;
    }
    return 0;
}

struct Ymd {
    int year, month, day;
};

// Fixed grammar. Two-slash forms with a 1-2 digit leading field are
// month-first (US convention); DD/MM/YYYY is not accepted.
std::optional<Ymd> parse_date_forms(const std::string& text) {
    static const std::regex compact(R"(^(\d{8})$)");
    static const std::regex iso_dash(R"(^(\d{4})-(\d{1,2})-(\d{1,2})$)");
    static const std::regex iso_slash(R"(^(\d{4})/(\d{1,2})/(\d{1,2})$)");
    static const std::regex us_slash(R"(^(\d{1,2})/(\d{1,2})/(\d{4})$)");
    static const std::regex day_month(R"(^(\d{1,2})\s+([A-Za-z]+)\s+(\d{4})$)");
    static const std::regex month_day(R"(^([A-Za-z]+)\s+(\d{1,2}),\s*(\d{4})$)");

    std::smatch m;
    if (std::regex_match(text, m, compact)) {
        const std::string s = m[1];
        return Ymd{std::stoi(s.substr(0, 4)), std::stoi(s.substr(4, 2)), std::stoi(s.substr(6, 2))};
    }
    if (std::regex_match(text, m, iso_dash) || std::regex_match(text, m, iso_slash)) {
        return Ymd{std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3])};
    }
    if (std::regex_match(text, m, us_slash)) {
        return Ymd{std::stoi(m[3]), std::stoi(m[1]), std::stoi(m[2])};
    }
    if (std::regex_match(text, m, day_month)) {
        const int month = month_from_name(m[2]);
        if (month == 0) return std::nullopt;
        return Ymd{std::stoi(m[3]), month, std::stoi(m[1])};
    }
    if (std::regex_match(text, m, month_day)) {
        const int month = month_from_name(m[1]);
        if (month == 0) return std::nullopt;
        return Ymd{std::stoi(m[3]), month, std::stoi(m[2])};
    }
    return std::nullopt;
}

}  // namespace

std::string date_normalize(std::string_view raw) {
    const std::string text{trim(raw)};
    const auto ymd = parse_date_forms(text);
    if (!ymd) {
        fail_oracle("unparseable date '" + std::string(raw) + "'");
    }
    if (!civil::is_valid_date(ymd->year, ymd->month, ymd->day)) {
        fail_oracle("invalid calendar date '" + std::string(raw) + "'");
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d%02d%02d", ymd->year, ymd->month, ymd->day);
    return buf;
}

std::int64_t to_unix_epoch(std::string_view yyyymmdd) {
    const std::string text{trim(yyyymmdd)};
    if (text.size() != 8 || !std::all_of(text.begin(), text.end(), [](unsigned char c) {
            return c >= '0' && c <= '9';
        })) {
        fail_oracle("expected YYYYMMDD, got '" + std::string(yyyymmdd) + "'");
    }
    const int year = std::stoi(text.substr(0, 4));
    const int month = std::stoi(text.substr(4, 2));
    const int day = std::stoi(text.substr(6, 2));
    if (!civil::is_valid_date(year, month, day)) {
        fail_oracle("invalid calendar date '" + std::string(yyyymmdd) + "'");
    }
    return civil::days_from_epoch(year, month, day) * civil::seconds_per_day;
}

double normalize_rating(double x, double lo, double hi) {
    if (!(hi > lo)) fail_oracle("degenerate rating range");
    if (x < lo || x > hi) fail_oracle("rating out of range");
    return (x - lo) / (hi - lo);
}

bool Taxonomy::has_type(std::string_view type) const {
    return std::find(types.begin(), types.end(), type) != types.end();
}

void Taxonomy::validate() const {
    if (types.empty()) {
        throw GdoError(ErrorCode::parse_error, "taxonomy: 'types' must be non-empty");
    }
    std::vector<std::string> seen;
    for (const auto& [keyword, type] : keyword_map) {
        if (keyword.empty()) {
            throw GdoError(ErrorCode::parse_error, "taxonomy: empty keyword");
        }
        if (std::find(seen.begin(), seen.end(), keyword) != seen.end()) {
            throw GdoError(ErrorCode::parse_error, "taxonomy: duplicate keyword '" + keyword + "'");
        }
        seen.push_back(keyword);
        if (!has_type(type)) {
            throw GdoError(ErrorCode::parse_error,
                           "taxonomy: keyword '" + keyword + "' maps to unknown type '" + type + "'");
        }
    }
}

Taxonomy taxonomy_from_json(const std::string& document) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(document);
    } catch (const nlohmann::ordered_json::exception& e) {
        throw GdoError(ErrorCode::parse_error, std::string("taxonomy: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("types") || !doc.contains("keywords")) {
        throw GdoError(ErrorCode::parse_error, "taxonomy: needs 'types' and 'keywords'");
    }
    Taxonomy taxonomy;
    for (const auto& t : doc["types"]) taxonomy.types.push_back(t.get<std::string>());
    for (const auto& entry : doc["keywords"]) {
        if (!entry.is_object() || !entry.contains("keyword") || !entry.contains("type")) {
            throw GdoError(ErrorCode::parse_error, "taxonomy: keyword entries need 'keyword' and 'type'");
        }
        taxonomy.keyword_map.emplace_back(ascii_lower(entry["keyword"].get<std::string>()),
                                          entry["type"].get<std::string>());
    }
    taxonomy.validate();
    return taxonomy;
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw GdoError(ErrorCode::io_error, "cannot open taxonomy '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return taxonomy_from_json(buffer.str());
}

Classification classify_item_type(std::string_view item_name, std::string_view current_type,
                                  const Taxonomy& taxonomy) {
    if (taxonomy.types.empty()) fail_oracle("empty taxonomy");
    if (!taxonomy.has_type(current_type)) {
        fail_oracle("unknown item type '" + std::string(current_type) + "'");
    }
    const std::string name = ascii_lower(item_name);
    for (const auto& [keyword, type] : taxonomy.keyword_map) {
        std::size_t pos = 0;
        while ((pos = name.find(keyword, pos)) != std::string::npos) {
            const bool left_ok = pos == 0 || !ascii_alnum(name[pos - 1]);
            const std::size_t end = pos + keyword.size();
            const bool right_ok = end == name.size() || !ascii_alnum(name[end]);
            if (left_ok && right_ok) {
                if (type == current_type) {
                    return {std::string(current_type), false, true};
                }
                return {type, true, true};
            }
            ++pos;
        }
    }
    return {std::string(current_type), false, false};  // no evidence, no change
}

std::vector<double> embed_text(std::string_view text, std::size_t dim) {
    if (dim < 2) fail_oracle("embedding dim must be at least 2");
    std::vector<double> acc(dim, 0.0);
    bool any_token = false;

    std::uint64_t hash = 0;
    bool in_token = false;
    auto flush = [&] {
        if (!in_token) return;
        const std::size_t bucket = hash % dim;
        acc[bucket] += (hash >> 63) ? -1.0 : 1.0;
        any_token = true;
        in_token = false;
    };
    for (unsigned char c : text) {
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        if (ascii_alnum(c)) {
            if (!in_token) {
                hash = 14695981039346656037ULL;  // FNV-1a 64 offset basis
                in_token = true;
            }
            hash ^= c;
            hash *= 1099511628211ULL;  // FNV-1a 64 prime
        } else {
            flush();
        }
    }
    flush();

    if (!any_token) fail_oracle("empty text");
    double sq = 0;
    for (double x : acc) sq += x * x;
    if (sq == 0) fail_oracle("degenerate embedding");
    const double norm = std::sqrt(sq);
    for (double& x : acc) x /= norm;
    return acc;
}

}  // namespace gdo
