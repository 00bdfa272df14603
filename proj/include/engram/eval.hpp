#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "engram/citation.hpp"
#include "engram/factcards.hpp"
#include "engram/memory.hpp"
#include "engram/prompting.hpp"
#include "engram/providers.hpp"
#include "engram/retrieval.hpp"
#include "engram/store.hpp"

namespace engram {

struct Conversation {
    std::string conversation_id;
    std::vector<DialogueTurn> turns;  // sorted by turn_index
};

struct DatasetQuestion {
    std::string question_id;
    std::string conversation_id;
    std::string text;
    std::string gold_answer;
    std::string category;  // e.g. single-hop, multi-hop, temporal, adversarial
};

struct Dataset {
    std::vector<Conversation> conversations;
    std::vector<DatasetQuestion> questions;

    const Conversation* find_conversation(const std::string& conversation_id) const;
};

// "adversarial" questions load normally but stay out of accuracy aggregates.
inline constexpr const char* kAdversarialCategory = "adversarial";

Dataset load_dataset(const std::string& path);
Dataset parse_dataset(const std::string& json_text, const std::string& origin);

// ---------------------------------------------------------------------------
// Ingestion

struct IngestPolicies {
    RouterPolicy router;
    ExtractorPolicy extractor;
    EmbeddingProvider* encoder = nullptr;  // required
};

struct IngestSummary {
    long long turns_processed = 0;
    long long episodic = 0;
    long long semantic = 0;
    long long procedural = 0;
    long long skipped_existing = 0;  // idempotent re-runs land here

    std::string line() const;  // "epi=<n> sem=<n> pro=<n>"
};

// Route -> extract -> embed -> persist, skipping (conversation, turn, type)
// combinations that are already stored.
IngestSummary ingest(const Dataset& dataset, MemoryStore& store, const IngestPolicies& policies);

// Text a record is embedded from: the body, prefixed by the title when the
// title adds information.
std::string record_embedding_text(const TypedRecord& record);

// ---------------------------------------------------------------------------
// Judging

enum class JudgeKind { containment, provider };

struct JudgePolicy {
    JudgeKind kind = JudgeKind::containment;
    ChatProvider* provider = nullptr;
    std::string prompt_template;  // {QUESTION} {GOLD} {PREDICTION}
};

struct JudgeOutcome {
    bool correct = false;
    bool parse_failed = false;  // unparseable judge reply, counted incorrect
    Usage usage;
};

JudgeOutcome judge(const std::string& question, const std::string& gold,
                   const std::string& prediction, const JudgePolicy& policy);

// Nearest-rank percentile: the ceil(q*N)-th smallest sample (1-based).
double percentile(std::vector<double> samples, double q);

// ---------------------------------------------------------------------------
// Per-question evaluation

struct QuestionResult {
    std::string question_id;
    std::string category;
    PromptMode mode = PromptMode::engram_r;
    std::string answer_text;
    std::string reasoning_text;
    bool errored = false;  // provider failure; counted, not dropped
    std::string error_message;
    bool judge_correct = false;
    bool judge_parse_failed = false;
    long long input_tokens = 0;
    long long output_tokens = 0;
    long long reasoning_tokens = 0;
    UsageProvenance usage_provenance = UsageProvenance::locally_estimated;
    double search_time_s = 0.0;  // retrieval + card rendering; 0 for full_context
    double total_time_s = 0.0;
    bool has_citations = false;  // engram_r only
    CitationReport citations;
    Usage judge_usage;
};

struct AnswerPipeline {
    const MemoryStore* store = nullptr;    // engram modes
    const Dataset* dataset = nullptr;      // full_context mode
    ChatProvider* chat = nullptr;          // required
    EmbeddingProvider* encoder = nullptr;  // engram modes
    RetrievalConfig retrieval;
    TemplateSet templates = TemplateSet::builtin();
    ClaimPolicy claim;
    JudgePolicy judge;
    int max_output = 4096;
    // Replaces measured times with scripted ones (search 0, total from the
    // mock wall_time) so repeated runs serialize byte-identically.
    bool deterministic_timing = false;
};

QuestionResult answer_question(const DatasetQuestion& question, PromptMode mode,
                               const AnswerPipeline& pipeline);

// ---------------------------------------------------------------------------
// Aggregation

struct CategoryAggregate {
    long long questions = 0;
    long long answered = 0;
    long long errored = 0;
    long long judged = 0;   // accuracy denominator
    long long correct = 0;
    long long input_tokens = 0;
    long long output_tokens = 0;
    long long reasoning_tokens = 0;
    double judge_accuracy = 0.0;  // 100 * correct / judged; 0 when judged = 0
    double search_p50 = 0.0, search_p95 = 0.0;
    double total_p50 = 0.0, total_p95 = 0.0;
    bool in_totals = true;  // contributes to the overall row
};

struct ModeReport {
    PromptMode mode = PromptMode::engram_r;
    std::map<std::string, CategoryAggregate> categories;
    CategoryAggregate overall;
    long long judge_tokens = 0;  // reported apart from answering-model tokens
    long long invalid_citation_answers = 0;
    std::vector<QuestionResult> results;  // sorted by question_id
};

struct EvalOptions {
    std::vector<PromptMode> modes = {PromptMode::engram_r};
    int workers = 4;
    bool include_adversarial_tokens = false;
    std::string dataset_path;            // metadata only
    nlohmann::json config_snapshot;      // metadata only
};

struct EvalReport {
    std::vector<ModeReport> modes;
    long long memory_layer_tokens = 0;  // routing/extraction usage, when tracked
    nlohmann::json meta;

    nlohmann::json to_json() const;
    std::string render_table() const;
};

ModeReport aggregate_report(std::vector<QuestionResult> results, PromptMode mode,
                            bool include_adversarial_tokens);

EvalReport run_eval(const Dataset& dataset, const AnswerPipeline& pipeline,
                    const EvalOptions& options);

}  // namespace engram
