#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gdo/contract.hpp"
#include "gdo/value.hpp"

namespace gdo {

enum class OracleTag { date_normalize, to_unix_epoch, normalize_rating, classify_item_type, embed_text };

const char* to_string(OracleTag tag);
std::optional<OracleTag> oracle_tag_from_string(const std::string& name);

struct GoldenExample {
    std::map<std::string, std::string> row;  // column -> raw cell text
    std::string expected;                    // pre-validation output text
};

struct RepairPolicy {
    int max_repairs = 2;
};

/// A user-defined prompt: the template plus everything needed to run it as
/// a row-wise operator and to test it.
struct UdpManifest {
    std::string name;
    std::string version;
    std::vector<std::string> inputs;
    std::string template_text;  // {{column}} placeholders; {{{{ / }}}} escape literal braces
    std::string output_column;
    OutputContract output_contract;
    std::optional<OracleTag> oracle;
    std::map<std::string, std::string> params;
    std::vector<GoldenExample> examples;
    RepairPolicy repair;
};

/// Parse and fully validate a manifest document (JSON). Errors name the
/// offending key.
UdpManifest parse_manifest(const std::string& document);
UdpManifest load_manifest(const std::filesystem::path& path);

/// Canonical re-serialization; parse_manifest(serialize_manifest(m)) == m.
std::string serialize_manifest(const UdpManifest& manifest);

/// Placeholder names referenced by a template, in order of appearance.
/// Throws parse_error on malformed placeholder syntax.
std::vector<std::string> extract_placeholders(const std::string& template_text);

/// Substitute each {{col}} with the cell's canonical text (Null renders
/// empty). Reads only manifest.inputs columns; deterministic.
std::string render_prompt(const UdpManifest& manifest, const Schema& schema, const Row& row);

}  // namespace gdo
