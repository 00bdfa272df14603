#include "engram/factcards.hpp"

#include "engram/errors.hpp"
#include "engram/heuristics.hpp"
#include "engram/text.hpp"

namespace engram {

bool FactCardSet::has(const std::string& card_id) const {
    for (const auto& card : cards)
        if (card.card_id == card_id) return true;
    return false;
}

std::vector<std::string> FactCardSet::ids() const {
    std::vector<std::string> out;
    out.reserve(cards.size());
    for (const auto& card : cards) out.push_back(card.card_id);
    return out;
}

std::string FactCardSet::render_lines() const {
    std::string out;
    for (const auto& card : cards) {
        out += card_line(card);
        out += '\n';
    }
    return out;
}

std::string card_line(const FactCard& card) {
    return "[" + card.card_id + "] " + card.claim + " (" + card.anchor + ")";
}

std::string template_claim(const TypedRecord& record) {
    switch (record.memory_type) {
        case MemoryType::semantic:
            return record.body;
        case MemoryType::episodic:
            return heuristics::condense_event(record.speaker, record.body);
        case MemoryType::procedural:
            return heuristics::condense_directive(record.body);
    }
    throw Error("unreachable memory type");
}

namespace {

// Single collapsed sentence, no terminal period; empty or over-length output
// is treated as a failed distillation.
std::string tidy_claim(const std::string& raw, std::size_t max_chars) {
    std::string claim = text::collapse_whitespace(raw);
    if (auto cut = claim.find(". "); cut != std::string::npos) claim.resize(cut);
    while (!claim.empty() && claim.back() == '.') claim.pop_back();
    if (claim.empty() || claim.size() > max_chars) return {};
    return claim;
}

using text::fill_slot;

std::string provider_claim(const TypedRecord& record, const ClaimPolicy& policy) {
    std::string tpl = policy.prompt_template.empty()
                          ? "Distill the memory record into one short factual claim sentence. "
                            "Reply with the sentence only.\nSpeaker: {SPEAKER}\nKind: {TYPE}\n"
                            "Record: {BODY}"
                          : policy.prompt_template;
    tpl = fill_slot(std::move(tpl), "{TYPE}", to_string(record.memory_type));
    tpl = fill_slot(std::move(tpl), "{SPEAKER}", record.speaker);
    tpl = fill_slot(std::move(tpl), "{BODY}", record.body);
    tpl = fill_slot(std::move(tpl), "{QUESTION}", policy.question);

    ChatRequest request;
    request.user_text = tpl;
    request.model_tag = "memory-layer";

    try {
        return tidy_claim(policy.provider->chat(request).answer_text, policy.max_claim_chars);
    } catch (const Error&) {
        return {};
    }
}

}  // namespace

FactCard render_card(const TypedRecord& record, int index, const ClaimPolicy& policy) {
    if (index < 1) throw PreconditionError("card index must be at least 1");

    FactCard card;
    card.card_id = "E" + std::to_string(index);
    card.anchor = record.anchor + " / " + record.speaker;
    card.record_ref = record.record_id;

    if (policy.kind == ClaimPolicyKind::provider) {
        if (!policy.provider)
            throw PreconditionError("provider claim policy selected but no provider configured");
        card.claim = provider_claim(record, policy);
        if (card.claim.empty()) {
            card.claim = template_claim(record);
            card.template_claim = true;
        }
    } else {
        card.claim = template_claim(record);
    }
    return card;
}

FactCardSet render_set(const EvidenceBundle& bundle, const ClaimPolicy& policy) {
    FactCardSet set;
    int index = 1;
    for (const auto& candidate : bundle.flatten())
        set.cards.push_back(render_card(candidate.record, index++, policy));
    return set;
}

}  // namespace engram
