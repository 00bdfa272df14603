#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "doctest.h"
#include "engram/errors.hpp"
#include "engram/providers.hpp"

using namespace engram;
using nlohmann::json;

// --------------------------------------------------------------------------
// MockEncoder

TEST_CASE("mock encoder is deterministic, unit-norm, and seed-sensitive") {
    MockEncoder encoder(32, 42);
    auto a = encoder.embed("I moved to Seattle");
    auto b = encoder.embed("I moved to Seattle");
    REQUIRE(a.size() == 32);
    CHECK(a == b);  // bit-identical

    double norm = 0.0;
    for (double x : a) norm += x * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0));

    MockEncoder other_seed(32, 43);
    CHECK(other_seed.embed("I moved to Seattle") != a);

    MockEncoder other_dim(8, 42);
    CHECK(other_dim.embed("I moved to Seattle").size() == 8);

    CHECK_THROWS_AS(encoder.embed("   "), PreconditionError);
    CHECK_THROWS_AS(MockEncoder(0, 1), PreconditionError);
}

TEST_CASE("mock encoder is a bag of tokens") {
    MockEncoder encoder(16, 7);
    CHECK(encoder.embed("alpha beta") == encoder.embed("beta ALPHA"));  // order/case free
    CHECK(encoder.embed("alpha beta") != encoder.embed("alpha gamma"));
}

TEST_CASE("embed_batch defaults to per-text embedding") {
    MockEncoder encoder(8, 9);
    auto batch = encoder.embed_batch({"one", "two"});
    REQUIRE(batch.size() == 2);
    CHECK(batch[0] == encoder.embed("one"));
    CHECK(batch[1] == encoder.embed("two"));
}

// --------------------------------------------------------------------------
// MockScript / MockChatProvider

TEST_CASE("mock script validates shape") {
    CHECK_THROWS_AS(MockScript::parse("not json"), SchemaError);
    CHECK_THROWS_AS(MockScript::parse(R"({"rules": []})"), SchemaError);  // no default
    CHECK_THROWS_AS(MockScript::parse(R"({"default": {}})"), SchemaError);  // no answer
    CHECK_THROWS_AS(
        MockScript::parse(R"({"default": {"answer": "x"}, "rules": [{"answer": "y"}]})"),
        SchemaError);  // rule without contains
}

TEST_CASE("scripted provider picks the first matching rule") {
    auto script = MockScript::parse(R"({
        "default": {"answer": "fallback"},
        "rules": [
            {"contains": "blue", "answer": "first"},
            {"contains": "blue sky", "answer": "shadowed"},
            {"contains": "green", "answer": "second", "reasoning": "thought", "wall_time": 1.5}
        ]
    })");
    MockChatProvider provider{script};

    ChatRequest request;
    request.user_text = "the blue sky";
    CHECK(provider.chat(request).answer_text == "first");

    request.user_text = "green fields";
    auto result = provider.chat(request);
    CHECK(result.answer_text == "second");
    CHECK(result.reasoning_text == "thought");
    CHECK(result.wall_time == doctest::Approx(1.5));

    request.user_text = "nothing matches";
    CHECK(provider.chat(request).answer_text == "fallback");

    request.user_text = "";
    CHECK_THROWS_AS(provider.chat(request), PreconditionError);
}

TEST_CASE("default-constructed mock echoes the user text") {
    MockChatProvider echo;
    ChatRequest request;
    request.user_text = "say this back";
    CHECK(echo.chat(request).answer_text == "say this back");
}

TEST_CASE("mock usage: scripted counts are provider-reported, others estimated") {
    auto script = MockScript::parse(R"({
        "default": {"answer": "plain"},
        "rules": [{"contains": "counted", "answer": "ok",
                   "usage": {"input_tokens": 10, "output_tokens": 2, "reasoning_tokens": 5}}]
    })");
    MockChatProvider provider{script};

    ChatRequest request;
    request.user_text = "counted question";
    auto reported = provider.chat(request);
    CHECK(reported.usage.input_tokens == 10);
    CHECK(reported.usage.reasoning_tokens == 5);
    CHECK(reported.usage.provenance == UsageProvenance::provider_reported);

    request.user_text = "three plain words";
    request.system_text = "two words";
    auto estimated = provider.chat(request);
    CHECK(estimated.usage.provenance == UsageProvenance::locally_estimated);
    CHECK(estimated.usage.input_tokens == 5);  // 3 user + 2 system
    CHECK(estimated.usage.output_tokens == 1);
}

// --------------------------------------------------------------------------
// UsageTrackingChatProvider

TEST_CASE("usage tracker accumulates across calls and degrades provenance") {
    auto script = MockScript::parse(R"({
        "default": {"answer": "estimated reply"},
        "rules": [{"contains": "exact", "answer": "ok",
                   "usage": {"input_tokens": 7, "output_tokens": 3}}]
    })");
    MockChatProvider inner{script};
    UsageTrackingChatProvider tracked(inner);

    CHECK(tracked.calls() == 0);
    CHECK(tracked.total().provenance == UsageProvenance::provider_reported);

    ChatRequest request;
    request.user_text = "exact one";
    tracked.chat(request);
    tracked.chat(request);
    CHECK(tracked.calls() == 2);
    CHECK(tracked.total().input_tokens == 14);
    CHECK(tracked.total().output_tokens == 6);
    CHECK(tracked.total().provenance == UsageProvenance::provider_reported);

    request.user_text = "now estimate me";
    tracked.chat(request);
    CHECK(tracked.calls() == 3);
    CHECK(tracked.total().provenance == UsageProvenance::locally_estimated);
    CHECK(tracked.total().input_tokens == 14 + 3);
}

// --------------------------------------------------------------------------
// InflightGate

TEST_CASE("inflight gate bounds concurrency") {
    InflightGate gate(3);
    std::atomic<int> active{0};
    std::atomic<int> peak{0};

    std::vector<std::thread> threads;
    for (int i = 0; i < 16; ++i) {
        threads.emplace_back([&] {
            InflightGate::Ticket ticket(gate);
            int now = ++active;
            int seen = peak.load();
            while (now > seen && !peak.compare_exchange_weak(seen, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
            --active;
        });
    }
    for (auto& thread : threads) thread.join();
    CHECK(peak.load() <= 3);
    CHECK(active.load() == 0);
}

TEST_CASE("inflight gate admits waiters in arrival order") {
    InflightGate gate(1);
    std::vector<int> admitted;
    std::mutex mu;

    // occupy the only slot, then stagger the arrivals
    std::thread holder([&] {
        InflightGate::Ticket ticket(gate);
        std::this_thread::sleep_for(std::chrono::milliseconds(250));
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(50));

    std::vector<std::thread> waiters;
    for (int i = 0; i < 5; ++i) {
        waiters.emplace_back([&, i] {
            InflightGate::Ticket ticket(gate);
            std::lock_guard lock(mu);
            admitted.push_back(i);
        });
        std::this_thread::sleep_for(std::chrono::milliseconds(30));  // orders the tickets
    }
    holder.join();
    for (auto& thread : waiters) thread.join();
    CHECK(admitted == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("inflight gate rejects nonpositive limits") {
    CHECK_THROWS_AS(InflightGate(0), PreconditionError);
}

// --------------------------------------------------------------------------
// HTTP providers against an in-process server

namespace {

struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit TestServer() = default;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }

    ~TestServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
};

HttpProviderOptions options_for(const TestServer& server) {
    HttpProviderOptions options;
    options.base_url = server.url();
    options.retries = 2;
    options.timeout_s = 5.0;
    return options;
}

}  // namespace

TEST_CASE("http chat provider round-trips answer, reasoning, and usage") {
    TestServer ts;
    json seen_body;
    std::string seen_auth;
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_body = json::parse(req.body);
        seen_auth = req.get_header_value("Authorization");
        res.set_content(json{
            {"choices", json::array({json{{"message",
                                           json{{"content", "the answer"},
                                                {"reasoning_content", "the chain"}}}}})},
            {"usage", json{{"prompt_tokens", 100},
                           {"completion_tokens", 20},
                           {"completion_tokens_details", json{{"reasoning_tokens", 12}}}}}}
                            .dump(),
                        "application/json");
    });
    ts.start();

    auto options = options_for(ts);
    options.api_key = "sk-test";
    options.model_tag = "default-model";
    HttpChatProvider provider(options);

    ChatRequest request;
    request.system_text = "be brief";
    request.user_text = "where?";
    request.model_tag = "answering";
    request.max_output = 128;

    auto result = provider.chat(request);
    CHECK(result.answer_text == "the answer");
    CHECK(result.reasoning_text == "the chain");
    CHECK(result.usage.input_tokens == 100);
    CHECK(result.usage.output_tokens == 20);
    CHECK(result.usage.reasoning_tokens == 12);
    CHECK(result.usage.provenance == UsageProvenance::provider_reported);
    CHECK(result.wall_time > 0.0);

    CHECK(seen_auth == "Bearer sk-test");
    CHECK(seen_body.at("model") == "answering");
    CHECK(seen_body.at("max_tokens") == 128);
    REQUIRE(seen_body.at("messages").size() == 2);
    CHECK(seen_body.at("messages")[0].at("role") == "system");
    CHECK(seen_body.at("messages")[1].at("content") == "where?");
}

TEST_CASE("http chat provider estimates usage when the server reports none") {
    TestServer ts;
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(
            json{{"choices",
                  json::array({json{{"message", json{{"content", "four words exactly here"}}}}})}}
                .dump(),
            "application/json");
    });
    ts.start();

    HttpChatProvider provider(options_for(ts));
    ChatRequest request;
    request.user_text = "one two three";
    auto result = provider.chat(request);
    CHECK(result.usage.provenance == UsageProvenance::locally_estimated);
    CHECK(result.usage.input_tokens == 3);
    CHECK(result.usage.output_tokens == 4);
}

TEST_CASE("http chat provider retries 5xx and then succeeds") {
    TestServer ts;
    std::atomic<int> hits{0};
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        if (++hits <= 2) {
            res.status = 503;
            res.set_content("overloaded", "text/plain");
            return;
        }
        res.set_content(
            json{{"choices", json::array({json{{"message", json{{"content", "recovered"}}}}})}}
                .dump(),
            "application/json");
    });
    ts.start();

    HttpChatProvider provider(options_for(ts));
    ChatRequest request;
    request.user_text = "retry me";
    CHECK(provider.chat(request).answer_text == "recovered");
    CHECK(hits.load() == 3);
}

TEST_CASE("http chat provider gives up after the retry budget on persistent 5xx") {
    TestServer ts;
    std::atomic<int> hits{0};
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 500;
    });
    ts.start();

    HttpChatProvider provider(options_for(ts));
    ChatRequest request;
    request.user_text = "doomed";
    CHECK_THROWS_AS(provider.chat(request), TransportError);
    CHECK(hits.load() == 3);  // retries=2 -> three attempts
}

TEST_CASE("http chat provider treats 4xx as protocol errors without retry") {
    TestServer ts;
    std::atomic<int> hits{0};
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
        res.set_content("{\"error\": \"bad key\"}", "application/json");
    });
    ts.start();

    HttpChatProvider provider(options_for(ts));
    ChatRequest request;
    request.user_text = "denied";
    try {
        provider.chat(request);
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(e.raw_payload.find("bad key") != std::string::npos);
    }
    CHECK(hits.load() == 1);
}

TEST_CASE("http chat provider rejects malformed response bodies") {
    TestServer ts;
    int mode = 0;
    ts.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        if (mode == 0)
            res.set_content("this is not json", "application/json");
        else
            res.set_content(R"({"no_choices": true})", "application/json");
    });
    ts.start();

    HttpChatProvider provider(options_for(ts));
    ChatRequest request;
    request.user_text = "parse me";
    CHECK_THROWS_AS(provider.chat(request), ProtocolError);
    mode = 1;
    CHECK_THROWS_AS(provider.chat(request), ProtocolError);
}

TEST_CASE("http embedding provider reorders by index and checks dimensions") {
    TestServer ts;
    ts.server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = json::parse(req.body);
        auto inputs = body.at("input").get<std::vector<std::string>>();
        // reply in reverse order; the client must reassemble by index
        json data = json::array();
        for (std::size_t i = inputs.size(); i-- > 0;) {
            data.push_back(json{{"index", i},
                                {"embedding", std::vector<double>{double(i), 1.0, 2.0}}});
        }
        res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    ts.start();

    HttpEmbeddingProvider provider(options_for(ts), 3);
    auto out = provider.embed_batch({"first", "second", "third"});
    REQUIRE(out.size() == 3);
    CHECK(out[0][0] == doctest::Approx(0.0));
    CHECK(out[2][0] == doctest::Approx(2.0));

    auto single = provider.embed("alone");
    CHECK(single.size() == 3);
}

TEST_CASE("http embedding provider flags wrong dims and partial responses") {
    TestServer ts;
    int mode = 0;
    ts.server.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        if (mode == 0) {
            res.set_content(
                json{{"data", json::array({json{{"index", 0},
                                                {"embedding", std::vector<double>{1.0}}}})}}
                    .dump(),
                "application/json");
        } else {
            res.set_content(json{{"data", json::array()}}.dump(), "application/json");
        }
    });
    ts.start();

    HttpEmbeddingProvider provider(options_for(ts), 3);
    CHECK_THROWS_AS(provider.embed("x"), DimensionMismatchError);
    mode = 1;
    CHECK_THROWS_AS(provider.embed("x"), ProtocolError);
    CHECK(provider.embed_batch({}).empty());
    CHECK_THROWS_AS(provider.embed_batch({"ok", ""}), PreconditionError);
}

TEST_CASE("from_env returns null when the URL variables are unset") {
    ::unsetenv("ENGRAM_PROVIDER_URL");
    ::unsetenv("ENGRAM_EMBED_URL");
    CHECK(HttpChatProvider::from_env({}) == nullptr);
    CHECK(HttpEmbeddingProvider::from_env({}, 8) == nullptr);

    ::setenv("ENGRAM_PROVIDER_URL", "http://127.0.0.1:9", 1);
    auto provider = HttpChatProvider::from_env({});
    CHECK(provider != nullptr);
    ::unsetenv("ENGRAM_PROVIDER_URL");
}

TEST_CASE("estimate_usage_tokens matches the text estimator") {
    CHECK(estimate_usage_tokens("") == 0);
    CHECK(estimate_usage_tokens("Hello, world!") == 4);
}
