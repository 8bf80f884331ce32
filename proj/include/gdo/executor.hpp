#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gdo/backend.hpp"
#include "gdo/contract.hpp"
#include "gdo/error.hpp"
#include "gdo/manifest.hpp"
#include "gdo/value.hpp"

namespace gdo {

enum class ErrorPolicy { fail, null_out, quarantine };

ErrorPolicy error_policy_from_string(const std::string& name);
const char* to_string(ErrorPolicy policy);

struct ExecutionConfig {
    int parallelism = 1;  // >= 1
    ErrorPolicy error_policy = ErrorPolicy::quarantine;
};

struct ExecutionReport {
    std::int64_t rows_in = 0;
    std::int64_t rows_out = 0;
    std::int64_t backend_calls = 0;  // non-cache-hit completes
    std::int64_t cache_hits = 0;
    std::int64_t repairs_attempted = 0;
    std::int64_t violations_final = 0;
    std::int64_t quarantined = 0;
    std::int64_t unverified_notes = 0;
    std::int64_t wall_ms = 0;
    std::map<std::string, std::int64_t> violation_histogram;  // final violations by reason
};

struct QuarantineAttempt {
    std::string prompt;
    std::string response_text;
    Violation violation;
};

/// Full evidence for a row whose output never satisfied the contract.
struct QuarantineRecord {
    std::size_t row_index = 0;  // 0-based input index
    Row input_row;
    std::vector<QuarantineAttempt> attempts;  // 1 + repairs attempted for this row
    std::string final_reason;
};

/// Thrown under ErrorPolicy::fail, carrying the lowest-index failing row.
class ExecutionAborted : public GdoError {
public:
    explicit ExecutionAborted(QuarantineRecord record);
    const QuarantineRecord& record() const { return record_; }

private:
    QuarantineRecord record_;
};

struct ApplyResult {
    Table output;
    std::vector<QuarantineRecord> quarantine;
    ExecutionReport report;
};

/// Apply one UDP to every row: render -> (cache) -> complete -> check, then
/// up to max_repairs repair rounds. Row i's output depends only on row i;
/// emitted rows keep input order for every parallelism level. Transport
/// failures abort the run regardless of error policy.
ApplyResult apply_udp(const Table& table, const UdpManifest& manifest, Backend& backend,
                      const ExecutionConfig& config);

struct GoldenResult {
    std::size_t example_index = 0;
    std::string expected;
    std::string actual;
    bool pass = false;
};

struct GoldenReport {
    std::vector<GoldenResult> results;
    bool all_pass() const;
};

/// Run each golden example as a one-row pipeline with repairs disabled.
/// Pass = exact string match after whitespace strip AND the actual text
/// satisfies the output contract.
GoldenReport run_golden_tests(const UdpManifest& manifest, Backend& backend);

/// Executable form of row independence: does applying the UDP commute with
/// permuting the rows? `permutation` must be a bijection on row indices.
bool permute_check(const Table& table, const UdpManifest& manifest, Backend& backend,
                   const std::vector<std::size_t>& permutation);

}  // namespace gdo
