#pragma once

#include <string>
#include <vector>

#include "engram/factcards.hpp"
#include "engram/memory.hpp"
#include "engram/retrieval.hpp"

namespace engram {

enum class PromptMode { full_context, engram_base, engram_r };

std::string to_string(PromptMode mode);
PromptMode prompt_mode_from_string(const std::string& name);

struct Prompt {
    std::string system_text;
    std::string user_text;
    PromptMode mode = PromptMode::full_context;
    long long token_estimate = 0;
};

// Prompt templates are plain text with named {SLOT}s. The compiled-in set is
// canonical; a directory of *.txt files with the same names may override
// individual entries (config key prompt.template_dir).
struct TemplateSet {
    std::string engram_r;      // {MEMORY CONTEXT} {CITATION FACTS} {Q1}
    std::string engram_base;   // {BANKS} {QUESTION}
    std::string full_context;  // {TRANSCRIPT} {QUESTION}
    std::string router;        // {UTTERANCE}
    std::string extractor;     // {TYPE} {SPEAKER} {UTTERANCE}
    std::string claim;         // {TYPE} {SPEAKER} {BODY} {QUESTION}
    std::string judge;         // {QUESTION} {GOLD} {PREDICTION}

    static TemplateSet builtin();
    static TemplateSet load_dir(const std::string& dir);
};

// "<anchor>: <title. body>" on one line; the title is omitted when empty or
// when the body already starts with it.
std::string serialize_record(const TypedRecord& record);

Prompt build_full_context_prompt(const std::string& question,
                                 const std::vector<DialogueTurn>& turns,
                                 const TemplateSet& templates);

Prompt build_engram_base_prompt(const std::string& question, const EvidenceBundle& bundle,
                                const TemplateSet& templates);

// The bundle fills the rich MEMORY CONTEXT section; the cards fill CITATION
// FACTS. Both orders match, so card ids line up with their source records.
Prompt build_engram_r_prompt(const std::string& question, const FactCardSet& cards,
                             const EvidenceBundle& bundle, const TemplateSet& templates);

}  // namespace engram
