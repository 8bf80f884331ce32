// gdo: apply user-defined prompts to tables, test them against their golden
// examples, and summarize run reports.
//
// Exit codes: 0 clean run, 2 run completed but rows were quarantined or
// nulled, 1 operational error (bad arguments, missing file, invalid
// manifest, backend unavailable, aborted run).

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <numeric>
#include <string>

#include "CLI11.hpp"

#include "gdo/backend.hpp"
#include "gdo/error.hpp"
#include "gdo/executor.hpp"
#include "gdo/manifest.hpp"
#include "gdo/oracle.hpp"
#include "gdo/report_io.hpp"
#include "gdo/table_io.hpp"

namespace {

using namespace gdo;

struct BackendFlags {
    std::string kind = "rule";
    std::string fixture;
    std::string taxonomy;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& flags) {
    cmd->add_option("--backend", flags.kind, "Backend kind")
        ->check(CLI::IsMember({"mock", "rule", "remote"}))
        ->capture_default_str();
    cmd->add_option("--fixture", flags.fixture, "Mock fixture file (backend mock)");
    cmd->add_option("--taxonomy", flags.taxonomy, "Taxonomy file (backend rule)");
}

std::shared_ptr<Backend> build_backend(const BackendFlags& flags) {
    if (flags.kind == "mock") {
        if (flags.fixture.empty())
            throw GdoError(ErrorCode::precondition, "--backend mock requires --fixture");
        return make_mock_backend_from_file(flags.fixture);
    }
    if (flags.kind == "rule") {
        std::optional<Taxonomy> taxonomy;
        if (!flags.taxonomy.empty()) taxonomy = load_taxonomy(flags.taxonomy);
        return make_rule_backend(std::move(taxonomy));
    }
    // Remote config comes from the environment so the key never appears in
    // argv or shell history.
    const char* endpoint = std::getenv("GDO_ENDPOINT");
    if (endpoint == nullptr || *endpoint == '\0')
        throw GdoError(ErrorCode::precondition, "--backend remote requires GDO_ENDPOINT");
    RemoteOptions options;
    options.endpoint = endpoint;
    if (const char* key = std::getenv("GDO_API_KEY")) options.api_key = key;
    return make_remote_backend(std::move(options));
}

TableFormat format_for(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".csv") return TableFormat::csv;
    if (ext == ".jsonl") return TableFormat::jsonl;
    throw GdoError(ErrorCode::precondition,
                   "cannot infer table format of '" + path.string() + "' (use .csv or .jsonl)");
}

int cmd_apply(const std::string& input, const std::string& output, const std::string& udp,
              const BackendFlags& backend_flags, int parallelism, const std::string& policy_name,
              const std::string& cache_path, bool no_cache, std::string quarantine_path,
              std::string report_path, bool self_check) {
    if (!cache_path.empty() && no_cache)
        throw GdoError(ErrorCode::precondition, "--cache and --no-cache are mutually exclusive");
    if (self_check && backend_flags.kind != "rule")
        throw GdoError(ErrorCode::precondition, "--self-check requires --backend rule");

    const UdpManifest manifest = load_manifest(udp);
    const Table table = read_table_file(input, format_for(input));

    std::shared_ptr<Backend> backend = build_backend(backend_flags);
    if (!cache_path.empty()) {
        auto store = std::make_shared<ResponseCacheStore>(cache_path);
        backend = make_cached_backend(std::move(backend), std::move(store));
    }

    ExecutionConfig config;
    config.parallelism = parallelism;
    config.error_policy = error_policy_from_string(policy_name);

    if (self_check && table.row_count() > 1) {
        std::vector<std::size_t> reversal(table.row_count());
        std::iota(reversal.begin(), reversal.end(), std::size_t{0});
        std::reverse(reversal.begin(), reversal.end());
        if (!permute_check(table, manifest, *backend, reversal))
            throw GdoError(ErrorCode::precondition,
                           "self-check failed: output depends on row order");
    }

    const ApplyResult result = apply_udp(table, manifest, *backend, config);

    if (quarantine_path.empty()) quarantine_path = output + ".quarantine.jsonl";
    if (report_path.empty()) report_path = output + ".report.json";
    write_file_atomic(output, write_table_string(result.output, format_for(output)));
    write_file_atomic(quarantine_path, quarantine_to_jsonl(result.quarantine, table.schema()));
    write_file_atomic(report_path, report_to_json(result.report));

    const ExecutionReport& r = result.report;
    std::cout << "rows_in=" << r.rows_in << " rows_out=" << r.rows_out
              << " quarantined=" << r.quarantined << " violations=" << r.violations_final
              << " repairs=" << r.repairs_attempted << " backend_calls=" << r.backend_calls
              << " cache_hits=" << r.cache_hits << "\n";
    return r.violations_final > 0 ? 2 : 0;
}

int cmd_test(const std::string& udp, const BackendFlags& backend_flags) {
    const UdpManifest manifest = load_manifest(udp);
    std::shared_ptr<Backend> backend = build_backend(backend_flags);
    const GoldenReport report = run_golden_tests(manifest, *backend);

    int passed = 0;
    for (const auto& result : report.results) {
        if (result.pass) {
            ++passed;
            std::cout << "ok   " << result.example_index << "  \"" << result.expected << "\"\n";
        } else {
            std::cout << "FAIL " << result.example_index << "  expected \"" << result.expected
                      << "\" actual \"" << result.actual << "\"\n";
        }
    }
    std::cout << passed << "/" << report.results.size() << " examples passed\n";
    return report.all_pass() ? 0 : 1;
}

int cmd_report(const std::string& path) {
    const ExecutionReport report = report_from_json(read_file(path));
    std::cout << "rows_in            " << report.rows_in << "\n"
              << "rows_out           " << report.rows_out << "\n"
              << "backend_calls      " << report.backend_calls << "\n"
              << "cache_hits         " << report.cache_hits << "\n"
              << "repairs_attempted  " << report.repairs_attempted << "\n"
              << "violations_final   " << report.violations_final << "\n"
              << "quarantined        " << report.quarantined << "\n"
              << "unverified_notes   " << report.unverified_notes << "\n"
              << "wall_ms            " << report.wall_ms << "\n";
    if (!report.violation_histogram.empty()) {
        std::cout << "violations by reason:\n";
        for (const auto& [reason, count] : report.violation_histogram)
            std::cout << "  " << reason << "  " << count << "\n";
    }
    const std::int64_t denominator = report.cache_hits + report.backend_calls;
    const double ratio =
        denominator > 0 ? static_cast<double>(report.cache_hits) / static_cast<double>(denominator)
                        : 0.0;
    std::printf("cache hit ratio: %.3f\n", ratio);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Run user-defined prompts as deterministic table operators"};
    app.require_subcommand(1);

    std::string input, output, udp, cache_path, quarantine_path, report_path, report_file;
    std::string policy_name = "quarantine";
    int parallelism = 1;
    bool no_cache = false;
    bool self_check = false;
    BackendFlags apply_backend, test_backend;

    CLI::App* apply = app.add_subcommand("apply", "Apply a UDP to a table");
    apply->add_option("--input", input, "Input table (.csv or .jsonl)")->required();
    apply->add_option("--output", output, "Output table (.csv or .jsonl)")->required();
    apply->add_option("--udp", udp, "UDP manifest file")->required();
    add_backend_flags(apply, apply_backend);
    apply->add_option("--parallelism", parallelism, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    apply->add_option("--error-policy", policy_name, "fail, null or quarantine")
        ->check(CLI::IsMember({"fail", "null", "quarantine"}))
        ->capture_default_str();
    apply->add_option("--cache", cache_path, "Response cache store file");
    apply->add_flag("--no-cache", no_cache, "Run without a response cache (default)");
    apply->add_option("--quarantine", quarantine_path,
                      "Quarantine records file (default: <output>.quarantine.jsonl)");
    apply->add_option("--report", report_path, "Run report file (default: <output>.report.json)");
    apply->add_flag("--self-check", self_check,
                    "Verify row-order independence before writing (rule backend only)");

    CLI::App* test = app.add_subcommand("test", "Run a UDP's golden examples");
    test->add_option("--udp", udp, "UDP manifest file")->required();
    add_backend_flags(test, test_backend);

    CLI::App* report = app.add_subcommand("report", "Summarize a run report");
    report->add_option("file", report_file, "Report JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (apply->parsed())
            return cmd_apply(input, output, udp, apply_backend, parallelism, policy_name,
                             cache_path, no_cache, quarantine_path, report_path, self_check);
        if (test->parsed()) return cmd_test(udp, test_backend);
        return cmd_report(report_file);
    } catch (const GdoError& e) {
        std::cerr << "gdo: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "gdo: " << e.what() << "\n";
        return 1;
    }
}
