// Standalone fixture-backed completion server for integration testing.
// Prints the bound port on stdout, then serves until interrupted.

#include <csignal>
#include <iostream>
#include <semaphore>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gdo/error.hpp"
#include "gdo/report_io.hpp"
#include "gdo/stub_server.hpp"

namespace {

std::binary_semaphore shutdown_signal{0};

void on_signal(int) { shutdown_signal.release(); }

std::vector<int> parse_status_script(const std::string& csv) {
    std::vector<int> script;
    std::istringstream in(csv);
    std::string field;
    while (std::getline(in, field, ',')) {
        try {
            script.push_back(std::stoi(field));
        } catch (const std::exception&) {
            throw gdo::GdoError(gdo::ErrorCode::precondition,
                                "--status-script entries must be integers: '" + field + "'");
        }
    }
    return script;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixture-backed stub implementing the completion wire protocol"};

    std::string fixture_path;
    gdo::StubServerOptions options;
    std::string status_script;
    app.add_option("--fixture", fixture_path, "Mock fixture file")->required();
    app.add_option("--api-key", options.api_key,
                   "Require 'authorization: Bearer <key>' on every request");
    app.add_option("--status-script", status_script,
                   "Comma-separated statuses for the first requests, e.g. 500,500,200 "
                   "(-1 = schema-invalid 200 body)");
    CLI11_PARSE(app, argc, argv);

    try {
        options.fixture_document = gdo::read_file(fixture_path);
        if (!status_script.empty()) options.status_script = parse_status_script(status_script);

        gdo::StubServer server(std::move(options));
        std::cout << server.port() << std::endl;

        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        shutdown_signal.acquire();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "stub_server: " << e.what() << "\n";
        return 1;
    }
}
