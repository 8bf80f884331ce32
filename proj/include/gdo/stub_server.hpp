#pragma once

#include <memory>
#include <string>
#include <vector>

namespace gdo {

struct StubServerOptions {
    /// Mock-backend fixture document; prompts resolve with the same
    /// exact-then-prefix, sequenced-replay rules.
    std::string fixture_document = "{}";

    /// When non-empty, requests must carry "authorization: Bearer <key>".
    std::string api_key;

    /// Scripted behavior for the first N requests, then normal service.
    /// 200 = serve normally, -1 = reply 200 with a schema-invalid body,
    /// anything else = reply with that HTTP status.
    std::vector<int> status_script;
};

/// Local HTTP server speaking the completion wire protocol over fixtures.
/// Binds an ephemeral 127.0.0.1 port and serves from a background thread
/// until destroyed. The status script makes retry behavior testable.
class StubServer {
public:
    explicit StubServer(StubServerOptions options);
    ~StubServer();

    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    int port() const;
    std::string base_url() const;  // http://127.0.0.1:<port>

    /// Transport-level requests observed so far, including scripted failures.
    int request_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace gdo
