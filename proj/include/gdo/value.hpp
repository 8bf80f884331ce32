#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace gdo {

enum class ValueKind { Null, Text, Integer, Real, Vector };

const char* to_string(ValueKind kind);
ValueKind value_kind_from_string(const std::string& name);

/// One table cell. Reals are always finite; vectors are never empty.
class Value {
public:
    Value() = default;  // Null

    static Value text(std::string s);
    static Value integer(std::int64_t v);
    static Value real(double v);          // throws on NaN/inf
    static Value vector(std::vector<double> v);  // throws on empty or non-finite

    ValueKind kind() const;
    bool is_null() const { return data_.index() == 0; }

    const std::string& as_text() const { return std::get<std::string>(data_); }
    std::int64_t as_integer() const { return std::get<std::int64_t>(data_); }
    double as_real() const { return std::get<double>(data_); }
    const std::vector<double>& as_vector() const { return std::get<std::vector<double>>(data_); }

    bool operator==(const Value&) const = default;

private:
    std::variant<std::monostate, std::string, std::int64_t, double, std::vector<double>> data_;
};

/// Shortest decimal text that parses back to exactly the same double.
std::string format_real(double v);

/// Stable text form used for prompts, cache keys and table emission:
/// Null -> "", Text -> as-is, Integer -> decimal, Real -> format_real,
/// Vector -> "[v1,v2,...]".
std::string canonical_text(const Value& v);

struct Column {
    std::string name;
    ValueKind kind = ValueKind::Text;

    bool operator==(const Column&) const = default;
};

/// Ordered list of uniquely named columns.
class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<Column> columns);  // throws on duplicate/empty names

    const std::vector<Column>& columns() const { return columns_; }
    std::size_t size() const { return columns_.size(); }
    bool has_column(const std::string& name) const;
    std::size_t index_of(const std::string& name) const;  // throws if absent
    const Column& at(std::size_t i) const { return columns_.at(i); }

    bool operator==(const Schema& other) const { return columns_ == other.columns_; }

private:
    std::vector<Column> columns_;
    std::unordered_map<std::string, std::size_t> index_;
};

using Row = std::vector<Value>;

/// Immutable-after-construction table: every row has exactly the schema's
/// columns and every non-null cell matches its column's declared kind.
class Table {
public:
    Table() = default;
    explicit Table(Schema schema) : schema_(std::move(schema)) {}

    void append_row(Row row);  // validates arity and cell kinds

    const Schema& schema() const { return schema_; }
    const std::vector<Row>& rows() const { return rows_; }
    std::size_t row_count() const { return rows_.size(); }
    const Value& cell(std::size_t row, const std::string& column) const;

    bool operator==(const Table& other) const {
        return schema_ == other.schema_ && rows_ == other.rows_;
    }

private:
    Schema schema_;
    std::vector<Row> rows_;
};

}  // namespace gdo
