#include "gdo/report_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "gdo/error.hpp"
#include "gdo/table_io.hpp"

namespace gdo {

namespace {

using ordered_json = nlohmann::ordered_json;

std::int64_t require_count(const ordered_json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_number_integer())
        throw GdoError(ErrorCode::parse_error,
                       std::string("report is missing integer field '") + key + "'");
    return doc[key].get<std::int64_t>();
}

}  // namespace

std::string report_to_json(const ExecutionReport& report) {
    ordered_json doc;
    doc["rows_in"] = report.rows_in;
    doc["rows_out"] = report.rows_out;
    doc["backend_calls"] = report.backend_calls;
    doc["cache_hits"] = report.cache_hits;
    doc["repairs_attempted"] = report.repairs_attempted;
    doc["violations_final"] = report.violations_final;
    doc["quarantined"] = report.quarantined;
    doc["unverified_notes"] = report.unverified_notes;
    doc["wall_ms"] = report.wall_ms;
    ordered_json histogram = ordered_json::object();
    for (const auto& [reason, count] : report.violation_histogram) histogram[reason] = count;
    doc["violation_histogram"] = std::move(histogram);
    return doc.dump(2) + "\n";
}

ExecutionReport report_from_json(const std::string& text) {
    ordered_json doc = ordered_json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw GdoError(ErrorCode::parse_error, "report is not a JSON object");

    ExecutionReport report;
    report.rows_in = require_count(doc, "rows_in");
    report.rows_out = require_count(doc, "rows_out");
    report.backend_calls = require_count(doc, "backend_calls");
    report.cache_hits = require_count(doc, "cache_hits");
    report.repairs_attempted = require_count(doc, "repairs_attempted");
    report.violations_final = require_count(doc, "violations_final");
    report.quarantined = require_count(doc, "quarantined");
    report.unverified_notes = require_count(doc, "unverified_notes");
    report.wall_ms = require_count(doc, "wall_ms");
    if (!doc.contains("violation_histogram") || !doc["violation_histogram"].is_object())
        throw GdoError(ErrorCode::parse_error, "report is missing 'violation_histogram'");
    for (const auto& [reason, count] : doc["violation_histogram"].items()) {
        if (!count.is_number_integer())
            throw GdoError(ErrorCode::parse_error,
                           "violation_histogram['" + reason + "'] is not an integer");
        report.violation_histogram[reason] = count.get<std::int64_t>();
    }
    return report;
}

std::string quarantine_to_jsonl(const std::vector<QuarantineRecord>& records,
                                const Schema& schema) {
    std::ostringstream out;
    for (const auto& record : records) {
        if (record.input_row.size() != schema.size())
            throw GdoError(ErrorCode::precondition, "quarantine row does not match schema");
        ordered_json line;
        line["row_index"] = record.row_index;
        ordered_json row = ordered_json::object();
        for (std::size_t c = 0; c < schema.size(); ++c)
            row[schema.at(c).name] = cell_to_json(record.input_row[c]);
        line["input_row"] = std::move(row);
        ordered_json attempts = ordered_json::array();
        for (const auto& attempt : record.attempts) {
            ordered_json a;
            a["prompt"] = attempt.prompt;
            a["response_text"] = attempt.response_text;
            a["violation"] = {{"reason_code", attempt.violation.reason_code},
                              {"message", attempt.violation.message},
                              {"contract", attempt.violation.contract_description},
                              {"raw_text", attempt.violation.raw_text}};
            attempts.push_back(std::move(a));
        }
        line["attempts"] = std::move(attempts);
        line["final_reason"] = record.final_reason;
        out << line.dump() << '\n';
    }
    return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path temp = path.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw GdoError(ErrorCode::io_error, "cannot open '" + temp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw GdoError(ErrorCode::io_error, "write failed for '" + temp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec)
        throw GdoError(ErrorCode::io_error,
                       "rename to '" + path.string() + "' failed: " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GdoError(ErrorCode::io_error, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw GdoError(ErrorCode::io_error, "read failed for '" + path.string() + "'");
    return buf.str();
}

}  // namespace gdo
