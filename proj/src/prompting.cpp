#include "engram/prompting.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "engram/errors.hpp"
#include "engram/text.hpp"

namespace engram {

namespace {

// Canonical reasoning template. The closing request line sits before the
// question section so the rendered prompt always ends on the "Q1:" line.
constexpr const char* kEngramR =
    R"(You are an intelligent memory assistant with access to conversation memories and citation facts.

MEMORY CONTEXT (rich information)
{MEMORY CONTEXT}

CITATION FACTS (for referencing)
{CITATION FACTS}

INSTRUCTIONS
1. Use the rich memory context above to understand the full situation.
2. Answer concisely in 1-3 sentences based on the memory context.
3. Cite supporting citation facts using [E1], [E2] format.
4. In your reasoning chain, use minimal tokens by:
   - ALWAYS reference the question as "Q1" (never repeat the full question).
   - ALWAYS cite facts by label only (e.g., "E1 shows...", "E2 indicates...").
   - NEVER repeat full fact content in reasoning.
   - Be extremely concise and focused.
5. Only say "not enough info" if truly no relevant information exists.

REASONING EXAMPLE
Need to answer Q1. E1 shows Melanie ran charity race on May 20. E2 indicates Caroline was proud. Answer: May 20, 2023. Cite [E1].

Please provide your answer with reasoning

QUESTION TO ANSWER
Q1: {Q1}
)";

constexpr const char* kEngramBase =
    R"({BANKS}

Question: {QUESTION}
)";

constexpr const char* kFullContext =
    R"({TRANSCRIPT}

Question: {QUESTION}
)";

constexpr const char* kRouter =
    R"(Classify the utterance into memory types. Reply with JSON {"episodic":0|1,"semantic":0|1,"procedural":0|1}.
Utterance: {UTTERANCE}
)";

constexpr const char* kExtractor =
    R"(Rewrite the utterance as a {TYPE} memory record. Reply with JSON {"title": string, "body": string}.
Speaker: {SPEAKER}
Utterance: {UTTERANCE}
)";

constexpr const char* kClaim =
    R"(Distill the memory record into one short factual claim sentence. Reply with the sentence only.
Speaker: {SPEAKER}
Kind: {TYPE}
Record: {BODY}
)";

constexpr const char* kJudge =
    R"(You are grading an answer for semantic correctness. Judge factual fidelity, completeness, and contextual appropriateness against the gold answer. Reply with exactly one token: CORRECT or INCORRECT.
Question: {QUESTION}
Gold answer: {GOLD}
Predicted answer: {PREDICTION}
)";

std::string trim(std::string s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

Prompt finish(std::string user_text, PromptMode mode) {
    Prompt prompt;
    prompt.user_text = trim(std::move(user_text));
    prompt.mode = mode;
    prompt.token_estimate =
        text::estimate_tokens(prompt.system_text) + text::estimate_tokens(prompt.user_text);
    return prompt;
}

void check_question(const std::string& question) {
    if (text::collapse_whitespace(question).empty())
        throw PreconditionError("question must be non-empty");
}

std::optional<std::string> read_template(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::string to_string(PromptMode mode) {
    switch (mode) {
        case PromptMode::full_context: return "full_context";
        case PromptMode::engram_base: return "engram_base";
        case PromptMode::engram_r: return "engram_r";
    }
    throw Error("unreachable prompt mode");
}

PromptMode prompt_mode_from_string(const std::string& name) {
    if (name == "full_context") return PromptMode::full_context;
    if (name == "engram_base") return PromptMode::engram_base;
    if (name == "engram_r") return PromptMode::engram_r;
    throw SchemaError("unknown prompt mode: " + name);
}

TemplateSet TemplateSet::builtin() {
    TemplateSet set;
    set.engram_r = kEngramR;
    set.engram_base = kEngramBase;
    set.full_context = kFullContext;
    set.router = kRouter;
    set.extractor = kExtractor;
    set.claim = kClaim;
    set.judge = kJudge;
    return set;
}

TemplateSet TemplateSet::load_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw StorageError("template directory not found: " + dir);

    TemplateSet set = builtin();
    auto load = [&](const char* name, std::string& slot) {
        if (auto content = read_template(fs::path(dir) / name)) slot = std::move(*content);
    };
    load("engram_r.txt", set.engram_r);
    load("engram_base.txt", set.engram_base);
    load("full_context.txt", set.full_context);
    load("router.txt", set.router);
    load("extractor.txt", set.extractor);
    load("claim.txt", set.claim);
    load("judge.txt", set.judge);
    return set;
}

std::string serialize_record(const TypedRecord& record) {
    std::string body = text::collapse_whitespace(record.body);
    std::string title = text::collapse_whitespace(record.title);
    std::string line = text::collapse_whitespace(record.anchor) + ": ";
    if (!title.empty() && body.compare(0, title.size(), title) != 0) line += title + ". ";
    line += body;
    return line;
}

Prompt build_full_context_prompt(const std::string& question,
                                 const std::vector<DialogueTurn>& turns,
                                 const TemplateSet& templates) {
    check_question(question);
    std::vector<std::string> lines;
    lines.reserve(turns.size());
    for (const auto& turn : turns) {
        lines.push_back(text::collapse_whitespace(turn.timestamp) + " " + turn.speaker + ": " +
                        text::collapse_whitespace(turn.text));
    }
    std::string user = text::fill_slot(templates.full_context, "{TRANSCRIPT}",
                                       text::join(lines, "\n"));
    user = text::fill_slot(std::move(user), "{QUESTION}", question);
    return finish(std::move(user), PromptMode::full_context);
}

Prompt build_engram_base_prompt(const std::string& question, const EvidenceBundle& bundle,
                                const TemplateSet& templates) {
    check_question(question);
    std::vector<std::string> sections;
    for (const auto& [speaker, bank] : bundle.per_speaker) {
        std::string section =
            speaker.empty() ? "Memories:" : "Memories of " + speaker + ":";
        for (const auto& candidate : bank) {
            section += '\n';
            section += serialize_record(candidate.record);
        }
        sections.push_back(std::move(section));
    }
    std::string user = text::fill_slot(templates.engram_base, "{BANKS}",
                                       text::join(sections, "\n\n"));
    user = text::fill_slot(std::move(user), "{QUESTION}", question);
    return finish(std::move(user), PromptMode::engram_base);
}

Prompt build_engram_r_prompt(const std::string& question, const FactCardSet& cards,
                             const EvidenceBundle& bundle, const TemplateSet& templates) {
    check_question(question);
    std::vector<std::string> context_lines;
    for (const auto& candidate : bundle.flatten())
        context_lines.push_back(serialize_record(candidate.record));

    std::vector<std::string> card_lines;
    card_lines.reserve(cards.cards.size());
    for (const auto& card : cards.cards) card_lines.push_back(card_line(card));

    std::string user = text::fill_slot(templates.engram_r, "{MEMORY CONTEXT}",
                                       text::join(context_lines, "\n"));
    user = text::fill_slot(std::move(user), "{CITATION FACTS}", text::join(card_lines, "\n"));
    user = text::fill_slot(std::move(user), "{Q1}", question);
    return finish(std::move(user), PromptMode::engram_r);
}

}  // namespace engram
