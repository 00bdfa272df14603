#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "engram/memory.hpp"
#include "engram/providers.hpp"
#include "engram/store.hpp"

namespace engram {

struct Query {
    std::string text;
    std::string conversation_id;
    std::vector<double> embedding;  // attached by make_query
};

struct ScoredCandidate {
    TypedRecord record;
    double score = 0.0;
};

// Total order over candidates: score desc, then anchor desc (ISO anchors sort
// chronologically, so later means more recent), then record_id asc.
bool candidate_before(const ScoredCandidate& a, const ScoredCandidate& b);

struct RetrievalConfig {
    // Per-bucket cutoff applied before aggregation; 0 tracks the budget.
    // Values below the budget can starve the global top-K and break the
    // exhaustive-oracle equivalence, so they are for experiments only.
    int k_per_type = 0;
    int budget = 25;  // global cap K across all banks
    bool split_by_speaker = true;
};

struct RetrievalDiagnostics {
    long long scored = 0;
    long long skipped_missing_embedding = 0;
    long long dropped_duplicates = 0;
    long long truncated = 0;
};

struct EvidenceBundle {
    std::map<std::string, std::vector<ScoredCandidate>> per_speaker;
    int budget = 25;

    std::size_t total() const;
    // Banks in speaker order, score order within each bank — the order that
    // assigns fact-card ids.
    std::vector<ScoredCandidate> flatten() const;
};

std::vector<double> embed(const std::string& text, EmbeddingProvider& encoder);

Query make_query(const std::string& text, const std::string& conversation_id,
                 EmbeddingProvider& encoder);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

std::vector<ScoredCandidate> retrieve_typed(const MemoryStore& store, const Query& query,
                                            MemoryType type, int k,
                                            const std::optional<std::string>& speaker = {},
                                            RetrievalDiagnostics* diag = nullptr);

// Union -> dedup on normalized body (keep the candidate winning the total
// order) -> global sort -> truncate to budget.
std::vector<ScoredCandidate> aggregate(const std::vector<std::vector<ScoredCandidate>>& per_type,
                                       int budget, RetrievalDiagnostics* diag = nullptr);

// Full pipeline. Buckets are deduplicated by normalized body before the
// per-bucket cutoff; with the cutoff at or above the budget this makes the
// result provably equal to one exhaustive score-dedup-sort-truncate pass, so
// growing the budget only ever appends candidates.
EvidenceBundle retrieve(const MemoryStore& store, const Query& query,
                        const RetrievalConfig& config, RetrievalDiagnostics* diag = nullptr);

}  // namespace engram
