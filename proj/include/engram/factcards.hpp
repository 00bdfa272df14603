#pragma once

#include <string>
#include <vector>

#include "engram/memory.hpp"
#include "engram/providers.hpp"
#include "engram/retrieval.hpp"

namespace engram {

struct FactCard {
    std::string card_id;  // "E1", "E2", ...
    std::string claim;
    std::string anchor;  // "<record anchor> / <speaker>"
    long long record_ref = 0;
    bool template_claim = false;  // provider distillation failed, template used
};

struct FactCardSet {
    std::vector<FactCard> cards;

    bool has(const std::string& card_id) const;
    std::vector<std::string> ids() const;
    // One "[E<i>] <claim> (<anchor>)" line per card.
    std::string render_lines() const;
};

enum class ClaimPolicyKind { template_based, provider };

struct ClaimPolicy {
    ClaimPolicyKind kind = ClaimPolicyKind::template_based;
    ChatProvider* provider = nullptr;
    std::size_t max_claim_chars = 160;
    std::string prompt_template;  // with {TYPE}, {SPEAKER}, {BODY}, {QUESTION} slots
    std::string question;         // filled into {QUESTION} for provider distillation
};

// Deterministic claim for a record: semantic bodies pass through verbatim,
// episodic bodies condense to the event clause prefixed by the speaker,
// procedural bodies condense to the directive clause.
std::string template_claim(const TypedRecord& record);

FactCard render_card(const TypedRecord& record, int index, const ClaimPolicy& policy);

FactCardSet render_set(const EvidenceBundle& bundle, const ClaimPolicy& policy);

std::string card_line(const FactCard& card);

}  // namespace engram
