#include "engram/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "engram/errors.hpp"
#include "engram/text.hpp"

namespace engram {

bool candidate_before(const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.record.anchor != b.record.anchor) return a.record.anchor > b.record.anchor;
    return a.record.record_id < b.record.record_id;
}

std::size_t EvidenceBundle::total() const {
    std::size_t n = 0;
    for (const auto& [speaker, bank] : per_speaker) n += bank.size();
    return n;
}

std::vector<ScoredCandidate> EvidenceBundle::flatten() const {
    std::vector<ScoredCandidate> out;
    out.reserve(total());
    for (const auto& [speaker, bank] : per_speaker)
        out.insert(out.end(), bank.begin(), bank.end());
    return out;
}

std::vector<double> embed(const std::string& text_in, EmbeddingProvider& encoder) {
    if (text::collapse_whitespace(text_in).empty())
        throw PreconditionError("cannot embed empty text");
    return encoder.embed(text_in);
}

Query make_query(const std::string& text_in, const std::string& conversation_id,
                 EmbeddingProvider& encoder) {
    Query query;
    query.text = text_in;
    query.conversation_id = conversation_id;
    query.embedding = embed(text_in, encoder);
    return query;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionMismatchError(int(a.size()), int(b.size()), "cosine");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw ZeroNormError("cosine similarity is undefined for a zero-norm vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

std::vector<ScoredCandidate> score_bucket(const MemoryStore& store, const Query& query,
                                          MemoryType type,
                                          const std::optional<std::string>& speaker,
                                          RetrievalDiagnostics* diag) {
    std::vector<ScoredCandidate> scored;
    for (auto& record : store.get_by_type(query.conversation_id, type, speaker)) {
        if (record.embedding.empty()) {
            if (diag) ++diag->skipped_missing_embedding;
            continue;
        }
        double score = cosine(query.embedding, record.embedding);
        scored.push_back(ScoredCandidate{std::move(record), score});
        if (diag) ++diag->scored;
    }
    std::sort(scored.begin(), scored.end(), candidate_before);
    return scored;
}

void dedup_sorted(std::vector<ScoredCandidate>& sorted, RetrievalDiagnostics* diag) {
    std::vector<ScoredCandidate> kept;
    std::unordered_set<std::string> seen_bodies;
    kept.reserve(sorted.size());
    for (auto& candidate : sorted) {
        if (!seen_bodies.insert(text::normalize_body(candidate.record.body)).second) {
            if (diag) ++diag->dropped_duplicates;
            continue;  // an earlier candidate with this body won the total order
        }
        kept.push_back(std::move(candidate));
    }
    sorted = std::move(kept);
}

}  // namespace

std::vector<ScoredCandidate> retrieve_typed(const MemoryStore& store, const Query& query,
                                            MemoryType type, int k,
                                            const std::optional<std::string>& speaker,
                                            RetrievalDiagnostics* diag) {
    if (query.embedding.empty()) throw PreconditionError("query embedding not attached");
    if (k < 1) throw PreconditionError("retrieval k must be at least 1");

    auto scored = score_bucket(store, query, type, speaker, diag);
    if (scored.size() > std::size_t(k)) scored.resize(std::size_t(k));
    return scored;
}

std::vector<ScoredCandidate> aggregate(const std::vector<std::vector<ScoredCandidate>>& per_type,
                                       int budget, RetrievalDiagnostics* diag) {
    if (budget < 1) throw PreconditionError("retrieval budget must be at least 1");

    std::vector<ScoredCandidate> merged;
    for (const auto& list : per_type) merged.insert(merged.end(), list.begin(), list.end());
    std::sort(merged.begin(), merged.end(), candidate_before);
    dedup_sorted(merged, diag);
    if (merged.size() > std::size_t(budget)) {
        if (diag) diag->truncated += static_cast<long long>(merged.size() - std::size_t(budget));
        merged.resize(std::size_t(budget));
    }
    return merged;
}

EvidenceBundle retrieve(const MemoryStore& store, const Query& query,
                        const RetrievalConfig& config, RetrievalDiagnostics* diag) {
    if (config.k_per_type < 0 || config.budget < 1)
        throw PreconditionError("retrieval config requires k_per_type >= 0 and budget >= 1");
    const int k = config.k_per_type > 0 ? config.k_per_type : config.budget;

    std::vector<std::optional<std::string>> banks;
    if (config.split_by_speaker) {
        for (auto& speaker : store.speakers(query.conversation_id)) banks.emplace_back(speaker);
    } else {
        banks.emplace_back(std::nullopt);
    }

    std::vector<std::vector<ScoredCandidate>> per_type;
    for (const auto& bank : banks) {
        for (MemoryType type :
             {MemoryType::episodic, MemoryType::semantic, MemoryType::procedural}) {
            auto bucket = score_bucket(store, query, type, bank, diag);
            dedup_sorted(bucket, diag);
            if (bucket.size() > std::size_t(k)) bucket.resize(std::size_t(k));
            per_type.push_back(std::move(bucket));
        }
    }

    EvidenceBundle bundle;
    bundle.budget = config.budget;
    for (auto& candidate : aggregate(per_type, config.budget, diag)) {
        std::string key = config.split_by_speaker ? candidate.record.speaker : std::string();
        bundle.per_speaker[key].push_back(std::move(candidate));
    }
    return bundle;
}

}  // namespace engram
