#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"

#include "gdo/value.hpp"

namespace gdo {

enum class TableFormat { csv, jsonl };

TableFormat table_format_from_string(const std::string& name);

/// Parse cell text into a typed value. "" is Null for every kind.
Value coerce_value(const std::string& raw, ValueKind kind);

/// CSV requires a header row (RFC 4180 quoting, UTF-8). JSONL is one object
/// per line with keys equal to the column names. Without a schema every
/// column is Text; with one, cells are coerced via coerce_value and the
/// schema must name exactly the columns found in the input.
Table read_table(std::istream& in, TableFormat format,
                 const std::optional<Schema>& schema = std::nullopt);
Table read_table_file(const std::filesystem::path& path, TableFormat format,
                      const std::optional<Schema>& schema = std::nullopt);

void write_table(const Table& table, std::ostream& out, TableFormat format);
std::string write_table_string(const Table& table, TableFormat format);

/// Cell <-> JSON mapping shared by the jsonl codec and the quarantine
/// records: Null<->null, Text<->string, Integer<->int, Real<->double,
/// Vector<->array of numbers.
nlohmann::ordered_json cell_to_json(const Value& v);
Value cell_from_json(const nlohmann::ordered_json& j, ValueKind kind, std::size_t line_no);

bool valid_utf8(const std::string& bytes);

}  // namespace gdo
