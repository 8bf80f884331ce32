#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gdo {

/// Ordered keyword table for item-type classification. First matching
/// keyword wins; every mapped type must be in `types`.
struct Taxonomy {
    std::vector<std::string> types;
    std::vector<std::pair<std::string, std::string>> keyword_map;  // lowercase keyword -> type

    bool has_type(std::string_view type) const;
    void validate() const;  // throws parse_error on a broken taxonomy
};

Taxonomy taxonomy_from_json(const std::string& document);
Taxonomy load_taxonomy(const std::filesystem::path& path);

// Deterministic reference implementations of the built-in tasks. They power
// the rule backend and double as independent oracles for any other backend.
// All of them throw GdoError(oracle_error) with a terse message on bad input.

/// Accepted forms: YYYYMMDD, YYYY-MM-DD, YYYY/MM/DD, MM/DD/YYYY,
/// DD Mon YYYY, Mon DD, YYYY — month names abbreviated or full, English,
/// case-insensitive. Two-slash forms are month-first. Returns YYYYMMDD.
std::string date_normalize(std::string_view raw);

/// Seconds from 1970-01-01T00:00:00 UTC to the date's midnight UTC,
/// proleptic Gregorian; negative before 1970. Input must be YYYYMMDD.
std::int64_t to_unix_epoch(std::string_view yyyymmdd);

/// Min-max normalization (x - lo) / (hi - lo) into [0,1].
double normalize_rating(double x, double lo, double hi);

struct Classification {
    std::string type;
    bool corrected = false;
    bool verified = false;  // false when no keyword matched (type left as-is)
};

/// Predict the type from the first whole-word, case-insensitive keyword hit
/// in item_name; correct current_type when the prediction differs.
Classification classify_item_type(std::string_view item_name, std::string_view current_type,
                                  const Taxonomy& taxonomy);

/// Signed feature-hashing embedding: lowercase, split on non-alphanumeric
/// runs, FNV-1a-64 per token -> bucket (mod dim) and sign (bit 63),
/// accumulate, L2-normalize.
std::vector<double> embed_text(std::string_view text, std::size_t dim);

}  // namespace gdo
