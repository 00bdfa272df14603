#include "engram/providers.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "engram/errors.hpp"
#include "engram/text.hpp"

namespace engram {

using nlohmann::json;

long long estimate_usage_tokens(const std::string& text_in) {
    return text::estimate_tokens(text_in);
}

// ---------------------------------------------------------------------------
// EmbeddingProvider / MockEncoder

std::vector<std::vector<double>> EmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

MockEncoder::MockEncoder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim_ <= 0) throw PreconditionError("encoder dimension must be positive");
}

std::vector<double> MockEncoder::embed(const std::string& text_in) {
    if (text::collapse_whitespace(text_in).empty())
        throw PreconditionError("cannot embed empty text");

    auto toks = text::tokens(text_in);
    if (toks.empty()) toks.push_back(text_in);  // pure punctuation: hash raw text

    std::vector<double> acc(static_cast<std::size_t>(dim_), 0.0);
    for (const auto& tok : toks) {
        std::uint64_t state = text::fnv1a64(tok) ^ seed_;
        for (int i = 0; i < dim_; ++i) {
            std::uint64_t bits = text::splitmix64(state);
            // 53 high bits -> uniform double in [0,1), then shift to [-1,1)
            double u = static_cast<double>(bits >> 11) * (1.0 / 9007199254740992.0);
            acc[static_cast<std::size_t>(i)] += u * 2.0 - 1.0;
        }
    }

    double norm_sq = 0.0;
    for (double v : acc) norm_sq += v * v;
    if (norm_sq == 0.0) throw ZeroNormError("mock encoder produced a zero vector");
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : acc) v *= inv;
    return acc;
}

// ---------------------------------------------------------------------------
// MockScript / MockChatProvider

namespace {

MockRule parse_rule(const json& node, const std::string& origin) {
    MockRule rule;
    if (node.contains("contains")) rule.contains = node.at("contains").get<std::string>();
    if (node.contains("answer")) rule.answer_text = node.at("answer").get<std::string>();
    if (node.contains("reasoning")) rule.reasoning_text = node.at("reasoning").get<std::string>();
    if (node.contains("wall_time")) rule.wall_time = node.at("wall_time").get<double>();
    if (node.contains("usage")) {
        const json& u = node.at("usage");
        Usage usage;
        usage.input_tokens = u.value("input_tokens", 0LL);
        usage.output_tokens = u.value("output_tokens", 0LL);
        usage.reasoning_tokens = u.value("reasoning_tokens", 0LL);
        usage.provenance = UsageProvenance::provider_reported;
        rule.usage = usage;
    }
    if (rule.answer_text.empty())
        throw SchemaError(origin + ": mock rule is missing a non-empty \"answer\"");
    return rule;
}

}  // namespace

MockScript MockScript::parse(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(origin + ": mock script is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("default"))
        throw SchemaError(origin + ": mock script requires a \"default\" response object");

    MockScript script;
    script.default_rule = parse_rule(doc.at("default"), origin);
    if (doc.contains("rules")) {
        for (const auto& node : doc.at("rules")) {
            MockRule rule = parse_rule(node, origin);
            if (rule.contains.empty())
                throw SchemaError(origin + ": mock rule requires a non-empty \"contains\"");
            script.rules.push_back(std::move(rule));
        }
    }
    return script;
}

MockScript MockScript::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open mock script: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

MockChatProvider::MockChatProvider() {
    script_.default_rule.answer_text = "{{echo}}";
}

MockChatProvider::MockChatProvider(MockScript script) : script_(std::move(script)) {}

ChatResult MockChatProvider::chat(const ChatRequest& request) {
    if (request.user_text.empty()) throw PreconditionError("chat request has empty user_text");

    const MockRule* hit = &script_.default_rule;
    for (const auto& rule : script_.rules) {
        if (request.user_text.find(rule.contains) != std::string::npos) {
            hit = &rule;
            break;
        }
    }

    ChatResult result;
    result.answer_text = hit->answer_text == "{{echo}}" ? request.user_text : hit->answer_text;
    result.reasoning_text = hit->reasoning_text;
    result.wall_time = hit->wall_time;
    if (hit->usage) {
        result.usage = *hit->usage;
    } else {
        result.usage.input_tokens =
            estimate_usage_tokens(request.system_text) + estimate_usage_tokens(request.user_text);
        result.usage.output_tokens = estimate_usage_tokens(result.answer_text);
        result.usage.reasoning_tokens = estimate_usage_tokens(result.reasoning_text);
        result.usage.provenance = UsageProvenance::locally_estimated;
    }
    return result;
}

// ---------------------------------------------------------------------------
// UsageTrackingChatProvider

ChatResult UsageTrackingChatProvider::chat(const ChatRequest& request) {
    ChatResult result = inner_.chat(request);
    std::lock_guard lock(mu_);
    total_.input_tokens += result.usage.input_tokens;
    total_.output_tokens += result.usage.output_tokens;
    total_.reasoning_tokens += result.usage.reasoning_tokens;
    if (result.usage.provenance == UsageProvenance::locally_estimated)
        total_.provenance = UsageProvenance::locally_estimated;
    ++calls_;
    return result;
}

Usage UsageTrackingChatProvider::total() const {
    std::lock_guard lock(mu_);
    return total_;
}

long long UsageTrackingChatProvider::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

// ---------------------------------------------------------------------------
// InflightGate

InflightGate::InflightGate(int max_inflight) : max_inflight_(max_inflight) {
    if (max_inflight_ < 1) throw PreconditionError("max_inflight must be at least 1");
}

void InflightGate::acquire() {
    std::unique_lock lock(mu_);
    const std::uint64_t ticket = next_ticket_++;
    cv_.wait(lock, [&] { return ticket == serving_ && active_ < max_inflight_; });
    ++serving_;
    ++active_;
    cv_.notify_all();
}

void InflightGate::release() {
    {
        std::lock_guard lock(mu_);
        --active_;
    }
    cv_.notify_all();
}

InflightGate::Ticket::Ticket(InflightGate& gate) : gate_(gate) { gate_.acquire(); }
InflightGate::Ticket::~Ticket() { gate_.release(); }

// ---------------------------------------------------------------------------
// HTTP providers

namespace {

constexpr int kBackoffBaseMs = 100;

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

httplib::Client make_client(const HttpProviderOptions& options) {
    httplib::Client client(options.base_url);
    auto timeout = std::chrono::milliseconds(static_cast<long long>(options.timeout_s * 1000.0));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    return client;
}

httplib::Headers make_headers(const HttpProviderOptions& options) {
    httplib::Headers headers;
    if (!options.api_key.empty())
        headers.emplace("Authorization", "Bearer " + options.api_key);
    return headers;
}

// POST with bounded retries: transport failures and 5xx responses back off
// exponentially; 4xx responses are protocol errors and are not retried.
json post_json(const HttpProviderOptions& options, const std::string& path, const json& body) {
    std::string last_error = "unknown transport failure";
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(kBackoffBaseMs << (attempt - 1)));
        }
        auto client = make_client(options);
        auto res = client.Post(path, make_headers(options), body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status >= 400) {
            throw ProtocolError("request rejected with status " + std::to_string(res->status),
                                res->body);
        }
        try {
            return json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw ProtocolError(std::string("response is not valid JSON: ") + e.what(),
                                res->body);
        }
    }
    throw TransportError(options.base_url + path + ": " + last_error + " after " +
                         std::to_string(options.retries + 1) + " attempt(s)");
}

}  // namespace

HttpChatProvider::HttpChatProvider(HttpProviderOptions options)
    : options_(std::move(options)), gate_(std::make_unique<InflightGate>(options_.max_inflight)) {
    if (options_.base_url.empty()) throw PreconditionError("chat provider requires a base URL");
    if (options_.path.empty()) options_.path = "/v1/chat/completions";
}

std::unique_ptr<HttpChatProvider> HttpChatProvider::from_env(const HttpProviderOptions& defaults) {
    HttpProviderOptions options = defaults;
    options.base_url = env_or("ENGRAM_PROVIDER_URL", options.base_url);
    options.api_key = env_or("ENGRAM_PROVIDER_KEY", options.api_key);
    if (options.base_url.empty()) return nullptr;
    return std::make_unique<HttpChatProvider>(std::move(options));
}

ChatResult HttpChatProvider::chat(const ChatRequest& request) {
    if (request.user_text.empty()) throw PreconditionError("chat request has empty user_text");

    json messages = json::array();
    if (!request.system_text.empty())
        messages.push_back({{"role", "system"}, {"content", request.system_text}});
    messages.push_back({{"role", "user"}, {"content", request.user_text}});

    json body = {
        {"model", request.model_tag.empty() ? options_.model_tag : request.model_tag},
        {"messages", std::move(messages)},
        {"max_tokens", request.max_output},
    };

    InflightGate::Ticket ticket(*gate_);
    const auto start = std::chrono::steady_clock::now();
    json doc = post_json(options_, options_.path, body);
    const auto stop = std::chrono::steady_clock::now();

    ChatResult result;
    result.wall_time = std::chrono::duration<double>(stop - start).count();
    try {
        const json& message = doc.at("choices").at(0).at("message");
        result.answer_text = message.value("content", std::string());
        if (message.contains("reasoning_content"))
            result.reasoning_text = message.at("reasoning_content").get<std::string>();
        else if (message.contains("reasoning"))
            result.reasoning_text = message.at("reasoning").get<std::string>();
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("chat response missing choices/message: ") + e.what(),
                            doc.dump());
    }

    if (doc.contains("usage") && doc.at("usage").is_object()) {
        const json& u = doc.at("usage");
        result.usage.input_tokens = u.value("prompt_tokens", 0LL);
        result.usage.output_tokens = u.value("completion_tokens", 0LL);
        if (u.contains("completion_tokens_details") &&
            u.at("completion_tokens_details").contains("reasoning_tokens")) {
            result.usage.reasoning_tokens =
                u.at("completion_tokens_details").at("reasoning_tokens").get<long long>();
            result.usage.provenance = UsageProvenance::provider_reported;
        } else if (u.contains("reasoning_tokens")) {
            result.usage.reasoning_tokens = u.at("reasoning_tokens").get<long long>();
            result.usage.provenance = UsageProvenance::provider_reported;
        } else {
            result.usage.reasoning_tokens = estimate_usage_tokens(result.reasoning_text);
            result.usage.provenance = UsageProvenance::locally_estimated;
        }
    } else {
        result.usage.input_tokens =
            estimate_usage_tokens(request.system_text) + estimate_usage_tokens(request.user_text);
        result.usage.output_tokens = estimate_usage_tokens(result.answer_text);
        result.usage.reasoning_tokens = estimate_usage_tokens(result.reasoning_text);
        result.usage.provenance = UsageProvenance::locally_estimated;
    }
    return result;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpProviderOptions options, int dim)
    : options_(std::move(options)),
      dim_(dim),
      gate_(std::make_unique<InflightGate>(options_.max_inflight)) {
    if (options_.base_url.empty()) throw PreconditionError("embed provider requires a base URL");
    if (dim_ <= 0) throw PreconditionError("encoder dimension must be positive");
    if (options_.path.empty()) options_.path = "/v1/embeddings";
}

std::unique_ptr<HttpEmbeddingProvider> HttpEmbeddingProvider::from_env(
    const HttpProviderOptions& defaults, int dim) {
    HttpProviderOptions options = defaults;
    options.base_url = env_or("ENGRAM_EMBED_URL", options.base_url);
    options.api_key = env_or("ENGRAM_EMBED_KEY", options.api_key);
    if (options.base_url.empty()) return nullptr;
    return std::make_unique<HttpEmbeddingProvider>(std::move(options), dim);
}

std::vector<double> HttpEmbeddingProvider::embed(const std::string& text_in) {
    return embed_batch({text_in}).front();
}

std::vector<std::vector<double>> HttpEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    for (const auto& t : texts)
        if (t.empty()) throw PreconditionError("cannot embed empty text");

    json body = {{"model", options_.model_tag}, {"input", texts}};

    InflightGate::Ticket ticket(*gate_);
    json doc = post_json(options_, options_.path, body);

    std::vector<std::vector<double>> out(texts.size());
    std::size_t filled = 0;
    try {
        for (const auto& item : doc.at("data")) {
            auto index = item.at("index").get<std::size_t>();
            if (index >= out.size() || !out[index].empty())
                throw ProtocolError("embedding response has duplicate or out-of-range index",
                                    doc.dump());
            out[index] = item.at("embedding").get<std::vector<double>>();
            if (out[index].size() != static_cast<std::size_t>(dim_))
                throw DimensionMismatchError(dim_, int(out[index].size()), "embedding response");
            ++filled;
        }
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("embedding response missing data/embedding: ") + e.what(),
                            doc.dump());
    }
    if (filled != texts.size())
        throw ProtocolError("embedding response returned " + std::to_string(filled) + " of " +
                                std::to_string(texts.size()) + " vectors",
                            doc.dump());
    return out;
}

}  // namespace engram
