// Seeded random corpora for property tests.
#pragma once

#include <iterator>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "engram/memory.hpp"
#include "engram/providers.hpp"
#include "engram/store.hpp"

namespace gen {

struct CorpusOptions {
    int max_records = 500;
    int max_dim = 32;
    double duplicate_body_rate = 0.25;   // reuse an earlier body verbatim or re-cased
    double missing_embedding_rate = 0.05;
    int speakers = 2;
};

struct Corpus {
    std::unique_ptr<engram::MemoryStore> store;
    std::vector<engram::TypedRecord> records;  // as stored, ids filled in
    int dim = 0;
    std::uint64_t seed = 0;
};

inline std::string random_words(std::mt19937_64& rng, int count) {
    static const char* kVocab[] = {"harbor", "lantern", "cobalt",  "meadow", "circuit",
                                   "velvet", "quartz",  "thimble", "orchid", "ledger",
                                   "garnet", "willow",  "ember",   "prism",  "sonnet"};
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kVocab) - 1);
    std::string out;
    for (int i = 0; i < count; ++i) {
        if (i) out += ' ';
        out += kVocab[pick(rng)];
    }
    return out;
}

inline Corpus make_corpus(std::uint64_t seed, const CorpusOptions& options = {}) {
    std::mt19937_64 rng(seed);
    Corpus corpus;
    corpus.seed = seed;
    corpus.dim = std::uniform_int_distribution<int>(2, options.max_dim)(rng);
    corpus.store = std::make_unique<engram::MemoryStore>(":memory:", corpus.dim);

    engram::MockEncoder encoder(corpus.dim, seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> word_count(2, 8);
    std::uniform_int_distribution<int> day(1, 28);
    std::uniform_int_distribution<int> month(1, 12);

    int n = std::uniform_int_distribution<int>(1, options.max_records)(rng);
    for (int i = 0; i < n; ++i) {
        engram::TypedRecord record;
        record.conversation_id = "c1";
        record.speaker = std::string(1, static_cast<char>(
            'A' + std::uniform_int_distribution<int>(0, options.speakers - 1)(rng)));
        record.memory_type = static_cast<engram::MemoryType>(
            std::uniform_int_distribution<int>(0, 2)(rng));
        record.source_turn = i + 1;

        if (!corpus.records.empty() && unit(rng) < options.duplicate_body_rate) {
            std::uniform_int_distribution<std::size_t> pick(0, corpus.records.size() - 1);
            record.body = corpus.records[pick(rng)].body;
            if (unit(rng) < 0.5 && !record.body.empty())
                record.body[0] = static_cast<char>(std::toupper(
                    static_cast<unsigned char>(record.body[0])));  // same body after folding
        } else {
            record.body = random_words(rng, word_count(rng));
        }
        if (record.memory_type != engram::MemoryType::semantic && unit(rng) < 0.4)
            record.title = random_words(rng, 2);

        if (unit(rng) < 0.5) {
            char anchor[16];
            std::snprintf(anchor, sizeof anchor, "2024-%02d-%02d", month(rng), day(rng));
            record.anchor = anchor;
        } else {
            record.anchor = "turn " + std::to_string(i + 1);
        }

        if (unit(rng) >= options.missing_embedding_rate)
            record.embedding = encoder.embed(record.body + " #" + std::to_string(i % 7));

        record.record_id = corpus.store->put(record);
        corpus.records.push_back(record);
    }
    return corpus;
}

inline std::vector<double> random_query_embedding(std::uint64_t seed, int dim) {
    engram::MockEncoder encoder(dim, seed);
    return encoder.embed("probe " + std::to_string(seed % 13));
}

}  // namespace gen
