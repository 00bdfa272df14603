#pragma once

#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace engram {

enum class UsageProvenance { provider_reported, locally_estimated };

struct Usage {
    long long input_tokens = 0;
    long long output_tokens = 0;
    long long reasoning_tokens = 0;
    UsageProvenance provenance = UsageProvenance::locally_estimated;
};

struct ChatRequest {
    std::string system_text;
    std::string user_text;
    std::string model_tag;
    int max_output = 4096;
};

struct ChatResult {
    std::string answer_text;
    std::string reasoning_text;
    Usage usage;
    double wall_time = 0.0;  // seconds
};

class ChatProvider {
  public:
    virtual ~ChatProvider() = default;
    virtual ChatResult chat(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual int dim() const = 0;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts);
    virtual std::string name() const = 0;
};

// Deterministic hash-to-vector encoder: each token hashes to a seeded
// pseudo-random direction; token directions are summed and unit-normalized.
// Identical text always embeds to the identical vector.
class MockEncoder : public EmbeddingProvider {
  public:
    explicit MockEncoder(int dim = 32, std::uint64_t seed = 1);
    int dim() const override { return dim_; }
    std::vector<double> embed(const std::string& text) override;
    std::string name() const override { return "mock-encoder"; }

  private:
    int dim_;
    std::uint64_t seed_;
};

// One scripted response: the first rule whose `contains` text appears in the
// request's user_text wins; otherwise the default response is returned.
struct MockRule {
    std::string contains;
    std::string answer_text;
    std::string reasoning_text;
    std::optional<Usage> usage;
    double wall_time = 0.0;
};

struct MockScript {
    std::vector<MockRule> rules;
    MockRule default_rule;

    static MockScript load(const std::string& path);
    static MockScript parse(const std::string& json_text, const std::string& origin = "<inline>");
};

class MockChatProvider : public ChatProvider {
  public:
    MockChatProvider();  // echo provider: answers with the user text
    explicit MockChatProvider(MockScript script);
    ChatResult chat(const ChatRequest& request) override;
    std::string name() const override { return "mock-chat"; }

  private:
    MockScript script_;
};

// Forwards to an inner provider while accumulating usage across calls.
// Shareable across threads.
class UsageTrackingChatProvider : public ChatProvider {
  public:
    explicit UsageTrackingChatProvider(ChatProvider& inner) : inner_(inner) {
        total_.provenance = UsageProvenance::provider_reported;  // degrades on estimates
    }
    ChatResult chat(const ChatRequest& request) override;
    std::string name() const override { return inner_.name(); }

    Usage total() const;
    long long calls() const;

  private:
    ChatProvider& inner_;
    mutable std::mutex mu_;
    Usage total_;
    long long calls_ = 0;
};

// FIFO admission gate bounding the number of outstanding requests.
class InflightGate {
  public:
    explicit InflightGate(int max_inflight);
    InflightGate(const InflightGate&) = delete;
    InflightGate& operator=(const InflightGate&) = delete;

    class Ticket {
      public:
        explicit Ticket(InflightGate& gate);
        ~Ticket();
        Ticket(const Ticket&) = delete;
        Ticket& operator=(const Ticket&) = delete;

      private:
        InflightGate& gate_;
    };

  private:
    void acquire();
    void release();

    std::mutex mu_;
    std::condition_variable cv_;
    int max_inflight_;
    int active_ = 0;
    std::uint64_t next_ticket_ = 0;
    std::uint64_t serving_ = 0;
};

struct HttpProviderOptions {
    std::string base_url;   // e.g. "http://host:port"; path defaults per provider
    std::string path;       // override endpoint path; empty = provider default
    std::string api_key;    // sent as a bearer credential when non-empty
    std::string model_tag;  // default model written into request bodies
    int retries = 2;        // additional attempts after the first
    double timeout_s = 60.0;
    int max_inflight = 4;
};

// Chat-completions-shaped HTTP client (messages array in, choices array out).
class HttpChatProvider : public ChatProvider {
  public:
    explicit HttpChatProvider(HttpProviderOptions options);
    ChatResult chat(const ChatRequest& request) override;
    std::string name() const override { return "http-chat"; }

    // Reads ENGRAM_PROVIDER_URL / ENGRAM_PROVIDER_KEY; null when no URL is set.
    static std::unique_ptr<HttpChatProvider> from_env(const HttpProviderOptions& defaults);

  private:
    HttpProviderOptions options_;
    std::unique_ptr<InflightGate> gate_;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
  public:
    HttpEmbeddingProvider(HttpProviderOptions options, int dim);
    int dim() const override { return dim_; }
    std::vector<double> embed(const std::string& text) override;
    std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) override;
    std::string name() const override { return "http-embed"; }

    // Reads ENGRAM_EMBED_URL / ENGRAM_EMBED_KEY; null when no URL is set.
    static std::unique_ptr<HttpEmbeddingProvider> from_env(const HttpProviderOptions& defaults,
                                                           int dim);

  private:
    HttpProviderOptions options_;
    int dim_;
    std::unique_ptr<InflightGate> gate_;
};

// words + punctuation marks; the local fallback when a service reports no usage
long long estimate_usage_tokens(const std::string& text);

}  // namespace engram
