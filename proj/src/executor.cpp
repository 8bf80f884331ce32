#include "gdo/executor.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "gdo/error.hpp"

namespace gdo {

namespace {

/// Everything one row produces, merged back in index order so the result is
/// identical for every parallelism level.
struct RowOutcome {
    bool ok = false;
    Value output;
    bool unverified = false;
    std::vector<QuarantineAttempt> attempts;  // failing attempts, in order
    std::string final_reason;
    std::int64_t backend_calls = 0;
    std::int64_t cache_hits = 0;
    std::int64_t repairs = 0;
};

std::int64_t parse_param_int(const UdpManifest& manifest, const std::string& key) {
    const std::string& raw = manifest.params.at(key);
    std::int64_t out = 0;
    auto res = std::from_chars(raw.data(), raw.data() + raw.size(), out);
    if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size())
        throw GdoError(ErrorCode::parse_error,
                       "manifest param '" + key + "' is not an integer: '" + raw + "'");
    return out;
}

double parse_param_real(const UdpManifest& manifest, const std::string& key) {
    const std::string& raw = manifest.params.at(key);
    double out = 0;
    auto res = std::from_chars(raw.data(), raw.data() + raw.size(), out);
    if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size())
        throw GdoError(ErrorCode::parse_error,
                       "manifest param '" + key + "' is not a number: '" + raw + "'");
    return out;
}

/// Request skeleton shared by every row: model and decode settings come from
/// reserved manifest params (model, temperature, max_tokens, seed).
BackendRequest base_request(const UdpManifest& manifest) {
    BackendRequest request;
    if (manifest.params.count("model")) request.model_id = manifest.params.at("model");
    if (manifest.params.count("temperature"))
        request.decode.temperature = parse_param_real(manifest, "temperature");
    if (manifest.params.count("max_tokens"))
        request.decode.max_tokens = static_cast<int>(parse_param_int(manifest, "max_tokens"));
    if (manifest.params.count("seed")) request.decode.seed = parse_param_int(manifest, "seed");
    request.oracle = manifest.oracle;
    request.params = manifest.params;
    return request;
}

RowOutcome run_row(const Table& table, const UdpManifest& manifest, Backend& backend,
                   const BackendRequest& skeleton, std::size_t row_index) {
    const Row& row = table.rows()[row_index];
    const std::string prompt = render_prompt(manifest, table.schema(), row);

    BackendRequest request = skeleton;
    request.prompt = prompt;
    request.structured_inputs.reserve(manifest.inputs.size());
    for (const auto& input : manifest.inputs) {
        request.structured_inputs.emplace_back(input,
                                               canonical_text(row[table.schema().index_of(input)]));
    }

    RowOutcome outcome;
    Violation last_violation;
    for (int attempt = 0; attempt <= manifest.repair.max_repairs; ++attempt) {
        if (attempt > 0) {
            request.prompt = repair_prompt(prompt, last_violation, attempt);
            request.bypass_cache = true;
            outcome.repairs += 1;
        }
        BackendResponse response = backend.complete(request);
        if (response.cached)
            outcome.cache_hits += 1;
        else
            outcome.backend_calls += 1;

        CheckResult result = check(manifest.output_contract, response.text);
        if (result.passed()) {
            outcome.ok = true;
            outcome.output = *result.value;
            outcome.unverified = response.note && *response.note == "unverified";
            return outcome;
        }
        outcome.attempts.push_back({request.prompt, response.text, *result.violation});
        last_violation = *result.violation;
    }
    outcome.final_reason = last_violation.reason_code;
    return outcome;
}

Schema output_schema(const Table& table, const UdpManifest& manifest) {
    std::vector<Column> columns = table.schema().columns();
    columns.push_back({manifest.output_column, output_kind(manifest.output_contract)});
    return Schema(std::move(columns));
}

}  // namespace

ErrorPolicy error_policy_from_string(const std::string& name) {
    if (name == "fail") return ErrorPolicy::fail;
    if (name == "null") return ErrorPolicy::null_out;
    if (name == "quarantine") return ErrorPolicy::quarantine;
    throw GdoError(ErrorCode::parse_error,
                   "unknown error policy '" + name + "' (expected fail, null or quarantine)");
}

const char* to_string(ErrorPolicy policy) {
    switch (policy) {
        case ErrorPolicy::fail: return "fail";
        case ErrorPolicy::null_out: return "null";
        case ErrorPolicy::quarantine: return "quarantine";
    }
    return "unknown";
}

ExecutionAborted::ExecutionAborted(QuarantineRecord record)
    : GdoError(ErrorCode::run_aborted,
               "row " + std::to_string(record.row_index) + " violated the output contract (" +
                   record.final_reason + ")"),
      record_(std::move(record)) {}

ApplyResult apply_udp(const Table& table, const UdpManifest& manifest, Backend& backend,
                      const ExecutionConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    if (config.parallelism < 1)
        throw GdoError(ErrorCode::precondition, "parallelism must be >= 1");
    for (const auto& input : manifest.inputs) {
        if (!table.schema().has_column(input))
            throw GdoError(ErrorCode::precondition,
                           "manifest input '" + input + "' is not a table column");
    }
    if (table.schema().has_column(manifest.output_column))
        throw GdoError(ErrorCode::precondition,
                       "table already has a column named '" + manifest.output_column + "'");

    const std::size_t n = table.row_count();
    const BackendRequest skeleton = base_request(manifest);
    std::vector<RowOutcome> outcomes(n);

    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            outcomes[i] = run_row(table, manifest, backend, skeleton, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (!failed.load(std::memory_order_relaxed)) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) break;
                    try {
                        outcomes[i] = run_row(table, manifest, backend, skeleton, i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        failed.store(true, std::memory_order_relaxed);
                        break;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    ApplyResult result;
    result.output = Table(output_schema(table, manifest));
    result.report.rows_in = static_cast<std::int64_t>(n);

    for (std::size_t i = 0; i < n; ++i) {
        RowOutcome& o = outcomes[i];
        result.report.backend_calls += o.backend_calls;
        result.report.cache_hits += o.cache_hits;
        result.report.repairs_attempted += o.repairs;

        Row out_row = table.rows()[i];
        if (o.ok) {
            out_row.push_back(std::move(o.output));
            result.output.append_row(std::move(out_row));
            if (o.unverified) result.report.unverified_notes += 1;
            continue;
        }

        result.report.violations_final += 1;
        result.report.violation_histogram[o.final_reason] += 1;
        QuarantineRecord record{i, table.rows()[i], std::move(o.attempts), o.final_reason};
        switch (config.error_policy) {
            case ErrorPolicy::fail:
                // Outcomes are merged in index order, so the first failure
                // seen here is the lowest-index one.
                throw ExecutionAborted(std::move(record));
            case ErrorPolicy::null_out:
                out_row.push_back(Value());
                result.output.append_row(std::move(out_row));
                break;
            case ErrorPolicy::quarantine:
                result.quarantine.push_back(std::move(record));
                break;
        }
    }
    result.report.rows_out = static_cast<std::int64_t>(result.output.row_count());
    result.report.quarantined = static_cast<std::int64_t>(result.quarantine.size());
    result.report.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
    return result;
}

bool GoldenReport::all_pass() const {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

GoldenReport run_golden_tests(const UdpManifest& manifest, Backend& backend) {
    if (manifest.examples.empty())
        throw GdoError(ErrorCode::precondition,
                       "manifest '" + manifest.name + "' has no golden examples");

    std::vector<Column> columns;
    columns.reserve(manifest.inputs.size());
    for (const auto& input : manifest.inputs) columns.push_back({input, ValueKind::Text});
    const Schema schema{columns};
    const BackendRequest skeleton = base_request(manifest);

    GoldenReport report;
    for (std::size_t i = 0; i < manifest.examples.size(); ++i) {
        const GoldenExample& example = manifest.examples[i];
        Row row;
        row.reserve(manifest.inputs.size());
        for (const auto& input : manifest.inputs) row.push_back(Value::text(example.row.at(input)));

        // One attempt, no repairs: goldens exercise the prompt as written,
        // and the raw response text is what gets compared.
        BackendRequest request = skeleton;
        request.prompt = render_prompt(manifest, schema, row);
        for (std::size_t c = 0; c < manifest.inputs.size(); ++c)
            request.structured_inputs.emplace_back(manifest.inputs[c], row[c].as_text());
        BackendResponse response = backend.complete(request);

        GoldenResult result;
        result.example_index = i;
        result.expected = example.expected;
        result.actual = response.text;
        result.pass = check(manifest.output_contract, response.text).passed() &&
                      strip_ascii_whitespace(response.text) ==
                          strip_ascii_whitespace(example.expected);
        report.results.push_back(std::move(result));
    }
    return report;
}

bool permute_check(const Table& table, const UdpManifest& manifest, Backend& backend,
                   const std::vector<std::size_t>& permutation) {
    const std::size_t n = table.row_count();
    if (permutation.size() != n)
        throw GdoError(ErrorCode::precondition, "permutation size does not match row count");
    std::vector<bool> seen(n, false);
    for (std::size_t p : permutation) {
        if (p >= n || seen[p])
            throw GdoError(ErrorCode::precondition, "permutation is not a bijection");
        seen[p] = true;
    }

    // Null policy keeps row counts aligned even when some rows violate.
    ExecutionConfig config;
    config.parallelism = 1;
    config.error_policy = ErrorPolicy::null_out;

    ApplyResult direct = apply_udp(table, manifest, backend, config);

    Table permuted{table.schema()};
    for (std::size_t i = 0; i < n; ++i) permuted.append_row(table.rows()[permutation[i]]);
    ApplyResult shuffled = apply_udp(permuted, manifest, backend, config);

    for (std::size_t i = 0; i < n; ++i) {
        if (shuffled.output.rows()[i] != direct.output.rows()[permutation[i]]) return false;
    }
    return true;
}

}  // namespace gdo
