#pragma once

#include <optional>
#include <string>
#include <vector>

#include "engram/providers.hpp"

namespace engram {

struct DialogueTurn {
    std::string conversation_id;
    long long turn_index = 0;
    std::string speaker;
    std::string text;
    std::string timestamp;  // ISO-8601 when the source has one, else raw prose
};

struct RouteDecision {
    bool episodic = false;
    bool semantic = false;
    bool procedural = false;

    int popcount() const { return int(episodic) + int(semantic) + int(procedural); }
    bool any() const { return episodic || semantic || procedural; }
    bool operator==(const RouteDecision&) const = default;
};

enum class MemoryType { episodic, semantic, procedural };

std::string to_string(MemoryType type);
MemoryType memory_type_from_string(const std::string& name);

struct TypedRecord {
    long long record_id = 0;  // store-assigned; 0 until persisted
    std::string conversation_id;
    std::string speaker;
    MemoryType memory_type = MemoryType::episodic;
    std::string title;  // empty for semantic records
    std::string body;
    std::string anchor;  // time anchor; falls back to the source turn timestamp
    long long source_turn = 0;
    std::vector<double> embedding;  // empty until attached
    bool template_fallback = false;  // provider extraction failed, template used

    // Machine-parsable instant of the anchor, when it is one.
    std::optional<std::string> resolved_time() const;
};

enum class RouterPolicyKind { heuristic, provider };
enum class ExtractorPolicyKind { template_based, provider };

struct RouterPolicy {
    RouterPolicyKind kind = RouterPolicyKind::heuristic;
    ChatProvider* provider = nullptr;      // required for kind == provider
    bool fallback_to_heuristic = true;     // on unparseable provider output
    std::string prompt_template;           // with {UTTERANCE} slot
};

struct ExtractorPolicy {
    ExtractorPolicyKind kind = ExtractorPolicyKind::template_based;
    ChatProvider* provider = nullptr;
    std::string prompt_template;  // with {UTTERANCE}, {SPEAKER}, {TYPE} slots
};

RouteDecision route(const DialogueTurn& turn, const RouterPolicy& policy);
RouteDecision route_heuristic(const DialogueTurn& turn);

std::vector<TypedRecord> extract(const DialogueTurn& turn, const RouteDecision& decision,
                                 const ExtractorPolicy& extractor);

}  // namespace engram
