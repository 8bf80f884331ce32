#include "gdo/value.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "gdo/error.hpp"

namespace gdo {

const char* to_string(ValueKind kind) {
    switch (kind) {
        case ValueKind::Null: return "null";
        case ValueKind::Text: return "text";
        case ValueKind::Integer: return "integer";
        case ValueKind::Real: return "real";
        case ValueKind::Vector: return "vector";
    }
    return "unknown";
}

ValueKind value_kind_from_string(const std::string& name) {
    if (name == "null") return ValueKind::Null;
    if (name == "text") return ValueKind::Text;
    if (name == "integer") return ValueKind::Integer;
    if (name == "real") return ValueKind::Real;
    if (name == "vector") return ValueKind::Vector;
    throw GdoError(ErrorCode::parse_error, "unknown value kind '" + name + "'");
}

Value Value::text(std::string s) {
    Value v;
    v.data_ = std::move(s);
    return v;
}

Value Value::integer(std::int64_t i) {
    Value v;
    v.data_ = i;
    return v;
}

Value Value::real(double d) {
    if (!std::isfinite(d)) {
        throw GdoError(ErrorCode::precondition, "real cell must be finite");
    }
    Value v;
    v.data_ = d;
    return v;
}

Value Value::vector(std::vector<double> vec) {
    if (vec.empty()) {
        throw GdoError(ErrorCode::precondition, "vector cell must be non-empty");
    }
    for (double d : vec) {
        if (!std::isfinite(d)) {
            throw GdoError(ErrorCode::precondition, "vector cell components must be finite");
        }
    }
    Value v;
    v.data_ = std::move(vec);
    return v;
}

ValueKind Value::kind() const {
    switch (data_.index()) {
        case 0: return ValueKind::Null;
        case 1: return ValueKind::Text;
        case 2: return ValueKind::Integer;
        case 3: return ValueKind::Real;
        default: return ValueKind::Vector;
    }
}

std::string format_real(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string canonical_text(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Null: return "";
        case ValueKind::Text: return v.as_text();
        case ValueKind::Integer: return std::to_string(v.as_integer());
        case ValueKind::Real: return format_real(v.as_real());
        case ValueKind::Vector: {
            std::string out = "[";
            const auto& vec = v.as_vector();
            for (std::size_t i = 0; i < vec.size(); ++i) {
                if (i > 0) out += ',';
                out += format_real(vec[i]);
            }
            out += ']';
            return out;
        }
    }
    return {};
}

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        const auto& name = columns_[i].name;
        if (name.empty()) {
            throw GdoError(ErrorCode::parse_error, "schema column name must be non-empty");
        }
        if (!index_.emplace(name, i).second) {
            throw GdoError(ErrorCode::parse_error, "duplicate schema column '" + name + "'");
        }
    }
}

bool Schema::has_column(const std::string& name) const { return index_.count(name) > 0; }

std::size_t Schema::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw GdoError(ErrorCode::precondition, "no such column '" + name + "'");
    }
    return it->second;
}

void Table::append_row(Row row) {
    if (row.size() != schema_.size()) {
        throw GdoError(ErrorCode::precondition,
                       "row has " + std::to_string(row.size()) + " cells, schema has " +
                           std::to_string(schema_.size()) + " columns");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!row[i].is_null() && row[i].kind() != schema_.at(i).kind) {
            throw GdoError(ErrorCode::precondition,
                           "cell kind mismatch in column '" + schema_.at(i).name + "': expected " +
                               to_string(schema_.at(i).kind) + ", got " + to_string(row[i].kind()));
        }
    }
    rows_.push_back(std::move(row));
}

const Value& Table::cell(std::size_t row, const std::string& column) const {
    return rows_.at(row).at(schema_.index_of(column));
}

}  // namespace gdo
