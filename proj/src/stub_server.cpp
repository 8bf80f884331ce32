#include "gdo/stub_server.hpp"

#include <atomic>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "gdo/backend.hpp"
#include "gdo/error.hpp"

namespace gdo {

namespace {

using njson = nlohmann::json;

std::int64_t token_count(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    std::int64_t n = 0;
    while (in >> word) ++n;
    return n;
}

void reply_json(httplib::Response& res, int status, const njson& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

}  // namespace

struct StubServer::Impl {
    StubServerOptions options;
    std::shared_ptr<Backend> mock;
    httplib::Server server;
    std::thread serve_thread;
    int port = 0;
    std::atomic<int> requests{0};

    void handle(const httplib::Request& req, httplib::Response& res) {
        const int index = requests.fetch_add(1);
        if (index < static_cast<int>(options.status_script.size())) {
            const int scripted = options.status_script[index];
            if (scripted == -1) {
                reply_json(res, 200, njson{{"not", "the completion schema"}});
                return;
            }
            if (scripted != 200) {
                reply_json(res, scripted, njson{{"error", "scripted failure"}});
                return;
            }
        }
        if (!options.api_key.empty() &&
            req.get_header_value("authorization") != "Bearer " + options.api_key) {
            reply_json(res, 401, njson{{"error", "unauthorized"}});
            return;
        }

        njson body = njson::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object() || !body.contains("model") ||
            !body["model"].is_string() || !body.contains("prompt") ||
            !body["prompt"].is_string() || !body.contains("temperature") ||
            !body["temperature"].is_number() || !body.contains("max_tokens") ||
            !body["max_tokens"].is_number_integer() || !body.contains("seed") ||
            !(body["seed"].is_null() || body["seed"].is_number_integer())) {
            reply_json(res, 400, njson{{"error", "malformed request body"}});
            return;
        }

        BackendRequest lookup;
        lookup.model_id = body["model"].get<std::string>();
        lookup.prompt = body["prompt"].get<std::string>();
        try {
            BackendResponse completion = mock->complete(lookup);
            reply_json(res, 200,
                       njson{{"text", completion.text},
                             {"usage",
                              {{"prompt_tokens", token_count(lookup.prompt)},
                               {"completion_tokens", token_count(completion.text)}}}});
        } catch (const GdoError& e) {
            reply_json(res, e.code() == ErrorCode::fixture_miss ? 404 : 400,
                       njson{{"error", e.message()}});
        }
    }
};

StubServer::StubServer(StubServerOptions options) : impl_(std::make_unique<Impl>()) {
    impl_->options = std::move(options);
    impl_->mock = make_mock_backend(impl_->options.fixture_document);
    impl_->server.Post("/v1/complete", [impl = impl_.get()](const httplib::Request& req,
                                                            httplib::Response& res) {
        impl->handle(req, res);
    });
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    if (impl_->port <= 0)
        throw GdoError(ErrorCode::io_error, "stub server could not bind a local port");
    impl_->serve_thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

StubServer::~StubServer() {
    impl_->server.stop();
    if (impl_->serve_thread.joinable()) impl_->serve_thread.join();
}

int StubServer::port() const { return impl_->port; }

std::string StubServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

int StubServer::request_count() const { return impl_->requests.load(); }

}  // namespace gdo
