#include "gdo/table_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gdo/error.hpp"

namespace gdo {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail_parse(std::size_t line_no, const std::string& what) {
    throw GdoError(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

bool valid_utf8(const std::string& bytes) {
    std::size_t i = 0;
    const auto n = bytes.size();
    while (i < n) {
        const unsigned char c = bytes[i];
        std::size_t len;
        if (c < 0x80) { i += 1; continue; }
        else if ((c & 0xE0) == 0xC0) { len = 2; if (c < 0xC2) return false; }
        else if ((c & 0xF0) == 0xE0) { len = 3; }
        else if ((c & 0xF8) == 0xF0) { len = 4; if (c > 0xF4) return false; }
        else return false;
        if (i + len > n) return false;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(bytes[i + k]) & 0xC0) != 0x80) return false;
        }
        // reject overlong encodings and surrogates
        if (len == 3) {
            const unsigned char c1 = bytes[i + 1];
            if (c == 0xE0 && c1 < 0xA0) return false;
            if (c == 0xED && c1 >= 0xA0) return false;
        }
        if (len == 4) {
            const unsigned char c1 = bytes[i + 1];
            if (c == 0xF0 && c1 < 0x90) return false;
            if (c == 0xF4 && c1 >= 0x90) return false;
        }
        i += len;
    }
    return true;
}

namespace {

std::int64_t parse_integer_strict(const std::string& raw) {
    const char* begin = raw.data();
    const char* end = raw.data() + raw.size();
    if (begin != end && *begin == '+') ++begin;
    std::int64_t out = 0;
    auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc{} || res.ptr != end || begin == end) {
        throw GdoError(ErrorCode::coercion_error, "'" + raw + "' is not an integer");
    }
    return out;
}

double parse_real_strict(const std::string& raw) {
    const char* begin = raw.data();
    const char* end = raw.data() + raw.size();
    if (begin != end && *begin == '+') ++begin;
    double out = 0;
    auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc{} || res.ptr != end || begin == end || !std::isfinite(out)) {
        throw GdoError(ErrorCode::coercion_error, "'" + raw + "' is not a finite real");
    }
    return out;
}

std::vector<double> parse_vector_strict(const std::string& raw) {
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
        throw GdoError(ErrorCode::coercion_error, "'" + raw + "' is not a [v1,v2,...] vector");
    }
    const std::string body = raw.substr(1, raw.size() - 2);
    if (body.empty()) {
        throw GdoError(ErrorCode::coercion_error, "vector cell must be non-empty");
    }
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = body.find(',', start);
        const std::string token =
            comma == std::string::npos ? body.substr(start) : body.substr(start, comma - start);
        out.push_back(parse_real_strict(token));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

// --- CSV -------------------------------------------------------------------

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line_no = 0;  // physical line the record starts on
};

std::vector<CsvRecord> parse_csv(const std::string& text) {
    std::vector<CsvRecord> records;
    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();

    while (i < n) {
        CsvRecord record;
        record.line_no = line;
        std::string field;
        bool done = false;
        while (!done) {
            if (i < n && text[i] == '"') {  // quoted field
                ++i;
                while (true) {
                    if (i >= n) fail_parse(line, "unterminated quoted field");
                    const char c = text[i];
                    if (c == '"') {
                        if (i + 1 < n && text[i + 1] == '"') {
                            field += '"';
                            i += 2;
                        } else {
                            ++i;
                            break;
                        }
                    } else {
                        if (c == '\n') ++line;
                        field += c;
                        ++i;
                    }
                }
                if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                    fail_parse(line, "unexpected character after closing quote");
                }
            } else {
                while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                    if (text[i] == '"') fail_parse(line, "unexpected quote inside unquoted field");
                    field += text[i];
                    ++i;
                }
            }
            if (i >= n) {
                record.fields.push_back(std::move(field));
                done = true;
            } else if (text[i] == ',') {
                record.fields.push_back(std::move(field));
                field.clear();
                ++i;
            } else {  // \n or \r\n ends the record
                if (text[i] == '\r') {
                    if (i + 1 >= n || text[i + 1] != '\n') {
                        fail_parse(line, "stray carriage return");
                    }
                    ++i;
                }
                ++i;
                ++line;
                record.fields.push_back(std::move(field));
                done = true;
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

bool needs_csv_quoting(const std::string& field) {
    return field.find_first_of(",\"\r\n") != std::string::npos;
}

void write_csv_field(std::ostream& out, const std::string& field) {
    if (!needs_csv_quoting(field)) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << "\"\"";
        else out << c;
    }
    out << '"';
}

Schema schema_for_columns(const std::vector<std::string>& names,
                          const std::optional<Schema>& declared) {
    std::vector<Column> columns;
    columns.reserve(names.size());
    if (!declared) {
        for (const auto& name : names) columns.push_back({name, ValueKind::Text});
        return Schema(std::move(columns));
    }
    for (const auto& name : names) {
        if (!declared->has_column(name)) {
            throw GdoError(ErrorCode::parse_error, "input column '" + name + "' not in schema");
        }
        columns.push_back(declared->at(declared->index_of(name)));
    }
    if (declared->size() != names.size()) {
        throw GdoError(ErrorCode::parse_error, "schema names columns missing from the input");
    }
    return Schema(std::move(columns));
}

Table read_csv(const std::string& text, const std::optional<Schema>& declared) {
    auto records = parse_csv(text);
    if (records.empty()) {
        throw GdoError(ErrorCode::parse_error, "csv input has no header row");
    }
    const auto& header = records.front().fields;
    Schema schema = schema_for_columns(header, declared);
    Table table(schema);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.size()) {
            fail_parse(rec.line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                        std::to_string(rec.fields.size()));
        }
        Row row;
        row.reserve(rec.fields.size());
        for (std::size_t c = 0; c < rec.fields.size(); ++c) {
            try {
                row.push_back(coerce_value(rec.fields[c], schema.at(c).kind));
            } catch (const GdoError& e) {
                throw GdoError(ErrorCode::coercion_error,
                               "row " + std::to_string(r) + ", column '" + schema.at(c).name +
                                   "': " + e.what());
            }
        }
        table.append_row(std::move(row));
    }
    return table;
}

// --- JSONL -----------------------------------------------------------------

Table read_jsonl(const std::string& text, const std::optional<Schema>& declared) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::optional<Schema> schema = declared;
    std::optional<Table> table;
    if (schema) table.emplace(*schema);

    while (std::getline(in, line)) {
        ++line_no;
        ordered_json doc;
        try {
            doc = ordered_json::parse(line);
        } catch (const ordered_json::exception& e) {
            fail_parse(line_no, std::string("invalid jsonl line: ") + e.what());
        }
        if (!doc.is_object()) fail_parse(line_no, "jsonl line is not an object");

        if (!schema) {
            std::vector<Column> columns;
            for (auto it = doc.begin(); it != doc.end(); ++it) {
                columns.push_back({it.key(), ValueKind::Text});
            }
            schema.emplace(std::move(columns));
            table.emplace(*schema);
        }
        if (doc.size() != schema->size()) {
            fail_parse(line_no, "expected " + std::to_string(schema->size()) + " keys, got " +
                                    std::to_string(doc.size()));
        }
        Row row;
        row.reserve(schema->size());
        for (const auto& column : schema->columns()) {
            auto it = doc.find(column.name);
            if (it == doc.end()) fail_parse(line_no, "missing column '" + column.name + "'");
            row.push_back(cell_from_json(*it, column.kind, line_no));
        }
        table->append_row(std::move(row));
    }
    if (!table) {
        // empty jsonl stream with no declared schema: empty zero-column table
        table.emplace(Schema{});
    }
    return *table;
}

}  // namespace

TableFormat table_format_from_string(const std::string& name) {
    if (name == "csv") return TableFormat::csv;
    if (name == "jsonl") return TableFormat::jsonl;
    throw GdoError(ErrorCode::parse_error, "unknown table format '" + name + "'");
}

Value coerce_value(const std::string& raw, ValueKind kind) {
    if (raw.empty()) return Value{};
    switch (kind) {
        case ValueKind::Null:
            throw GdoError(ErrorCode::coercion_error, "non-empty text for null column");
        case ValueKind::Text: return Value::text(raw);
        case ValueKind::Integer: return Value::integer(parse_integer_strict(raw));
        case ValueKind::Real: return Value::real(parse_real_strict(raw));
        case ValueKind::Vector: return Value::vector(parse_vector_strict(raw));
    }
    throw GdoError(ErrorCode::coercion_error, "unknown value kind");
}

Table read_table(std::istream& in, TableFormat format, const std::optional<Schema>& schema) {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    if (!valid_utf8(text)) {
        throw GdoError(ErrorCode::parse_error, "input is not valid UTF-8");
    }
    return format == TableFormat::csv ? read_csv(text, schema) : read_jsonl(text, schema);
}

Table read_table_file(const std::filesystem::path& path, TableFormat format,
                      const std::optional<Schema>& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw GdoError(ErrorCode::io_error, "cannot open '" + path.string() + "'");
    }
    return read_table(in, format, schema);
}

void write_table(const Table& table, std::ostream& out, TableFormat format) {
    if (format == TableFormat::csv) {
        const auto& columns = table.schema().columns();
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c > 0) out << ',';
            write_csv_field(out, columns[c].name);
        }
        out << '\n';
        for (const auto& row : table.rows()) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c > 0) out << ',';
                write_csv_field(out, canonical_text(row[c]));
            }
            out << '\n';
        }
    } else {
        for (const auto& row : table.rows()) {
            ordered_json obj = ordered_json::object();
            for (std::size_t c = 0; c < row.size(); ++c) {
                obj[table.schema().at(c).name] = cell_to_json(row[c]);
            }
            out << obj.dump() << '\n';
        }
    }
    if (!out) {
        throw GdoError(ErrorCode::io_error, "table write failed");
    }
}

std::string write_table_string(const Table& table, TableFormat format) {
    std::ostringstream out;
    write_table(table, out, format);
    return out.str();
}

nlohmann::ordered_json cell_to_json(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Null: return nullptr;
        case ValueKind::Text: return v.as_text();
        case ValueKind::Integer: return v.as_integer();
        case ValueKind::Real: return v.as_real();
        case ValueKind::Vector: return v.as_vector();
    }
    return nullptr;
}

Value cell_from_json(const nlohmann::ordered_json& j, ValueKind kind, std::size_t line_no) {
    if (j.is_null()) return Value{};
    switch (kind) {
        case ValueKind::Null:
            fail_parse(line_no, "non-null value for null column");
        case ValueKind::Text:
            if (j.is_string()) return Value::text(j.get<std::string>());
            if (j.is_number() || j.is_boolean()) return Value::text(j.dump());
            fail_parse(line_no, "expected a scalar for a text column");
        case ValueKind::Integer:
            if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
            if (j.is_string()) return coerce_value(j.get<std::string>(), kind);
            fail_parse(line_no, "expected an integer");
        case ValueKind::Real:
            if (j.is_number()) return Value::real(j.get<double>());
            if (j.is_string()) return coerce_value(j.get<std::string>(), kind);
            fail_parse(line_no, "expected a number");
        case ValueKind::Vector: {
            if (j.is_string()) return coerce_value(j.get<std::string>(), kind);
            if (!j.is_array()) fail_parse(line_no, "expected an array for a vector column");
            std::vector<double> vec;
            vec.reserve(j.size());
            for (const auto& elem : j) {
                if (!elem.is_number()) fail_parse(line_no, "vector components must be numbers");
                vec.push_back(elem.get<double>());
            }
            if (vec.empty()) fail_parse(line_no, "vector cell must be non-empty");
            return Value::vector(std::move(vec));
        }
    }
    fail_parse(line_no, "unknown value kind");
}

}  // namespace gdo
