#include "gdo/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "gdo/error.hpp"

namespace gdo {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail_manifest(const std::string& what) {
    throw GdoError(ErrorCode::parse_error, "manifest: " + what);
}

bool word_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Walks template text emitting literal runs and placeholder names.
// "{{{{" and "}}}}" escape literal braces; any other "{{" must open a
// well-formed {{name}} and a bare "}}" is rejected.
template <typename OnLiteral, typename OnPlaceholder>
void walk_template(const std::string& tpl, OnLiteral&& literal, OnPlaceholder&& placeholder) {
    std::size_t i = 0;
    const std::size_t n = tpl.size();
    while (i < n) {
        if (tpl.compare(i, 4, "{{{{") == 0) {
            literal("{{");
            i += 4;
        } else if (tpl.compare(i, 4, "}}}}") == 0) {
            literal("}}");
            i += 4;
        } else if (tpl.compare(i, 2, "{{") == 0) {
            std::size_t j = i + 2;
            while (j < n && word_char(tpl[j])) ++j;
            if (j == i + 2 || tpl.compare(j, 2, "}}") != 0) {
                fail_manifest("malformed placeholder at offset " + std::to_string(i));
            }
            placeholder(tpl.substr(i + 2, j - i - 2));
            i = j + 2;
        } else if (tpl.compare(i, 2, "}}") == 0) {
            fail_manifest("unmatched '}}' at offset " + std::to_string(i));
        } else {
            literal(std::string_view(tpl).substr(i, 1));
            i += 1;
        }
    }
}

std::vector<std::string> required_params(OracleTag tag) {
    switch (tag) {
        case OracleTag::normalize_rating: return {"lo", "hi"};
        case OracleTag::embed_text: return {"dim"};
        default: return {};
    }
}

void validate_manifest(const UdpManifest& m) {
    if (m.name.empty()) fail_manifest("'name' must be non-empty");
    if (m.template_text.empty()) fail_manifest("'template' must be non-empty");
    if (m.output_column.empty()) fail_manifest("'output.column' must be non-empty");
    if (m.repair.max_repairs < 0) fail_manifest("'repair.max_repairs' must be non-negative");

    for (const auto& input : m.inputs) {
        if (input.empty()) fail_manifest("'inputs' entries must be non-empty");
        if (std::count(m.inputs.begin(), m.inputs.end(), input) > 1) {
            fail_manifest("duplicate input '" + input + "'");
        }
    }

    const auto placeholders = extract_placeholders(m.template_text);
    for (const auto& name : placeholders) {
        if (std::find(m.inputs.begin(), m.inputs.end(), name) == m.inputs.end()) {
            fail_manifest("unknown placeholder '" + name + "'");
        }
    }
    if (!m.oracle) {
        // without an oracle every input must feed the prompt
        for (const auto& input : m.inputs) {
            if (std::find(placeholders.begin(), placeholders.end(), input) == placeholders.end()) {
                fail_manifest("input '" + input + "' is never referenced by the template");
            }
        }
    }

    if (std::find(m.inputs.begin(), m.inputs.end(), m.output_column) != m.inputs.end()) {
        fail_manifest("output column '" + m.output_column + "' is also an input");
    }

    if (m.oracle) {
        for (const auto& param : required_params(*m.oracle)) {
            if (!m.params.count(param)) {
                fail_manifest(std::string("oracle ") + to_string(*m.oracle) + " requires param '" +
                              param + "'");
            }
        }
    }

    for (std::size_t i = 0; i < m.examples.size(); ++i) {
        for (const auto& input : m.inputs) {
            if (!m.examples[i].row.count(input)) {
                fail_manifest("example " + std::to_string(i) + " is missing input '" + input + "'");
            }
        }
    }
}

}  // namespace

const char* to_string(OracleTag tag) {
    switch (tag) {
        case OracleTag::date_normalize: return "date_normalize";
        case OracleTag::to_unix_epoch: return "to_unix_epoch";
        case OracleTag::normalize_rating: return "normalize_rating";
        case OracleTag::classify_item_type: return "classify_item_type";
        case OracleTag::embed_text: return "embed_text";
    }
    return "unknown";
}

std::optional<OracleTag> oracle_tag_from_string(const std::string& name) {
    if (name == "date_normalize") return OracleTag::date_normalize;
    if (name == "to_unix_epoch") return OracleTag::to_unix_epoch;
    if (name == "normalize_rating") return OracleTag::normalize_rating;
    if (name == "classify_item_type") return OracleTag::classify_item_type;
    if (name == "embed_text") return OracleTag::embed_text;
    return std::nullopt;
}

std::vector<std::string> extract_placeholders(const std::string& template_text) {
    std::vector<std::string> names;
    walk_template(
        template_text, [](std::string_view) {},
        [&](std::string name) { names.push_back(std::move(name)); });
    return names;
}

UdpManifest parse_manifest(const std::string& document) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const ordered_json::exception& e) {
        fail_manifest(e.what());
    }
    if (!doc.is_object()) fail_manifest("document is not an object");

    UdpManifest m;
    try {
        for (const char* key : {"name", "version", "inputs", "template", "output"}) {
            if (!doc.contains(key)) fail_manifest(std::string("missing required key '") + key + "'");
        }
        m.name = doc["name"].get<std::string>();
        m.version = doc["version"].is_string() ? doc["version"].get<std::string>()
                                               : doc["version"].dump();
        for (const auto& input : doc["inputs"]) m.inputs.push_back(input.get<std::string>());
        m.template_text = doc["template"].get<std::string>();

        const auto& output = doc["output"];
        if (!output.is_object() || !output.contains("column") || !output.contains("contract")) {
            fail_manifest("'output' needs 'column' and 'contract'");
        }
        m.output_column = output["column"].get<std::string>();
        m.output_contract = contract_from_json(output["contract"]);

        if (doc.contains("oracle") && !doc["oracle"].is_null()) {
            const std::string tag = doc["oracle"].get<std::string>();
            m.oracle = oracle_tag_from_string(tag);
            if (!m.oracle) fail_manifest("unknown oracle tag '" + tag + "'");
        }
        if (doc.contains("params")) {
            for (const auto& [key, value] : doc["params"].items()) {
                m.params[key] = value.is_string() ? value.get<std::string>() : value.dump();
            }
        }
        if (doc.contains("examples")) {
            for (const auto& entry : doc["examples"]) {
                if (!entry.is_object() || !entry.contains("row") || !entry.contains("expected")) {
                    fail_manifest("'examples' entries need 'row' and 'expected'");
                }
                GoldenExample example;
                for (const auto& [key, value] : entry["row"].items()) {
                    example.row[key] = value.is_string() ? value.get<std::string>() : value.dump();
                }
                example.expected = entry["expected"].get<std::string>();
                m.examples.push_back(std::move(example));
            }
        }
        if (doc.contains("repair")) {
            const auto& repair = doc["repair"];
            if (!repair.is_object() || !repair.contains("max_repairs")) {
                fail_manifest("'repair' needs 'max_repairs'");
            }
            m.repair.max_repairs = repair["max_repairs"].get<int>();
        }
    } catch (const ordered_json::exception& e) {
        fail_manifest(e.what());
    }

    validate_manifest(m);
    return m;
}

UdpManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw GdoError(ErrorCode::io_error, "cannot open manifest '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest(buffer.str());
}

std::string serialize_manifest(const UdpManifest& manifest) {
    ordered_json doc;
    doc["name"] = manifest.name;
    doc["version"] = manifest.version;
    doc["inputs"] = manifest.inputs;
    doc["template"] = manifest.template_text;
    doc["output"] = {{"column", manifest.output_column},
                     {"contract", contract_to_json(manifest.output_contract)}};
    if (manifest.oracle) doc["oracle"] = to_string(*manifest.oracle);
    if (!manifest.params.empty()) doc["params"] = manifest.params;
    if (!manifest.examples.empty()) {
        doc["examples"] = ordered_json::array();
        for (const auto& example : manifest.examples) {
            doc["examples"].push_back({{"row", example.row}, {"expected", example.expected}});
        }
    }
    doc["repair"] = {{"max_repairs", manifest.repair.max_repairs}};
    return doc.dump(2) + "\n";
}

std::string render_prompt(const UdpManifest& manifest, const Schema& schema, const Row& row) {
    for (const auto& input : manifest.inputs) {
        if (!schema.has_column(input)) {
            throw GdoError(ErrorCode::render_error, "missing input column '" + input + "'");
        }
    }
    std::string out;
    out.reserve(manifest.template_text.size());
    walk_template(
        manifest.template_text, [&](std::string_view literal) { out += literal; },
        [&](const std::string& name) {
            if (!schema.has_column(name)) {
                throw GdoError(ErrorCode::render_error, "missing input column '" + name + "'");
            }
            const Value& cell = row.at(schema.index_of(name));
            if (cell.kind() == ValueKind::Vector) {
                throw GdoError(ErrorCode::render_error,
                               "vector cell '" + name + "' cannot be rendered into a prompt");
            }
            out += canonical_text(cell);
        });
    return out;
}

}  // namespace gdo
