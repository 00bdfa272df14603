#include "engram/heuristics.hpp"

#include <array>
#include <vector>

#include "engram/text.hpp"

namespace engram::heuristics {

namespace {

using text::collapse_whitespace;
using text::contains_token;
using text::lower_ascii;
using text::split_clauses;
using text::tokens;

constexpr std::array kFirstPerson = {"i", "we", "my", "our"};

constexpr std::array kEventVerbs = {
    "moved",    "went",    "visited",   "traveled", "travelled", "attended", "met",
    "joined",   "left",    "started",   "finished", "graduated", "married",  "bought",
    "sold",     "adopted", "won",       "lost",     "quit",      "retired",  "arrived",
    "returned", "celebrated", "hosted", "ran",      "flew",      "drove"};

constexpr std::array kPastTimePhrases = {"last year", "last month", "last week",
                                         "last night", "yesterday", " ago"};

constexpr std::array kPreferencePhrases = {"i like", "i love",   "i prefer",
                                           "i enjoy", "i hate",  "i dislike"};

constexpr std::array kDirectivePhrases = {
    "don't forget", "dont forget", "remember to", "make sure",   "be sure to",
    "how to",       "step by step", "deadline",   "due by",      "due on",
    "is due",       "you should",  "you need to", "you must"};

constexpr std::array kDirectiveTokens = {"recipe", "instructions", "steps", "submit"};

constexpr std::array kLeadingConjunctions = {"and", "but", "so", "well", "also"};

constexpr std::array kHedges = {"i realized", "i think",   "i guess",
                                "i believe",  "i suppose", "i noticed"};

constexpr std::array kLeadingAdverbs = {"finally", "just",     "really", "actually",
                                        "eventually", "already", "recently", "also"};

constexpr std::array kLeadingFillers = {"just", "please", "also", "and", "but",
                                        "so",   "then",   "well", "hey", "oh"};

bool contains_phrase(const std::string& lowered, std::string_view phrase) {
    return lowered.find(phrase) != std::string::npos;
}

template <typename Seq>
bool any_phrase(const std::string& lowered, const Seq& phrases) {
    for (std::string_view p : phrases)
        if (contains_phrase(lowered, p)) return true;
    return false;
}

template <typename Seq>
bool any_token(const std::vector<std::string>& toks, const Seq& words) {
    for (std::string_view w : words)
        if (contains_token(toks, w)) return true;
    return false;
}

// "my <one or two tokens> is" — attribute statements like "my hometown is Kyoto".
bool has_attribute_shape(const std::vector<std::string>& toks) {
    for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
        if (toks[i] != "my") continue;
        if (toks[i + 2] == "is") return true;
        if (i + 3 < toks.size() && toks[i + 3] == "is") return true;
    }
    return false;
}

bool token_in(std::string_view tok, const auto& words) {
    for (std::string_view w : words)
        if (tok == w) return true;
    return false;
}

// Drops leading tokens of `clause` matched by `words`, one at a time,
// comparing case-insensitively but preserving the remainder verbatim.
std::string drop_leading(std::string clause, const auto& words, int max_drops) {
    for (int n = 0; n < max_drops; ++n) {
        std::size_t end = 0;
        while (end < clause.size() && clause[end] != ' ') ++end;
        if (end == clause.size()) break;  // never drop the last token
        if (!token_in(lower_ascii(clause.substr(0, end)), words)) break;
        clause.erase(0, end + 1);
    }
    return clause;
}

std::string strip_terminal_punct(std::string s) {
    while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?')) s.pop_back();
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

std::string strip_trailing_time(std::string s) {
    const std::string lowered = lower_ascii(s);
    for (std::string_view suffix :
         {"last year", "last month", "last week", "last night", "yesterday"}) {
        if (lowered.size() > suffix.size() &&
            lowered.compare(lowered.size() - suffix.size(), suffix.size(), suffix) == 0) {
            std::string out = s.substr(0, s.size() - suffix.size());
            while (!out.empty() && out.back() == ' ') out.pop_back();
            return out;
        }
    }
    // "<number> <unit> ago" tail, e.g. "three years ago" / "2 weeks ago"
    if (lowered.size() >= 4 && lowered.compare(lowered.size() - 4, 4, " ago") == 0) {
        auto toks = tokens(lowered);
        if (toks.size() >= 3 && toks.back() == "ago") {
            std::size_t cut = lowered.rfind(toks[toks.size() - 3]);
            if (cut != std::string::npos && cut > 0) {
                std::string out = s.substr(0, cut);
                while (!out.empty() && out.back() == ' ') out.pop_back();
                if (!out.empty()) return out;
            }
        }
    }
    return s;
}

// Replaces first-person references with third-person speaker forms.
// Multi-token rewrites run before single-token ones so "i like" wins over "i".
std::string to_third_person(std::string_view speaker, const std::string& clause) {
    const std::string sp(speaker);
    static const std::vector<std::pair<std::string, std::string>> kMulti = {
        {"i am", "{} is"},     {"i'm", "{} is"},      {"i have", "{} has"},
        {"i've", "{} has"},    {"i was", "{} was"},   {"i'd", "{} would"},
        {"i like", "{} likes"},{"i love", "{} loves"},{"i prefer", "{} prefers"},
        {"i enjoy", "{} enjoys"}, {"i hate", "{} hates"}, {"i dislike", "{} dislikes"},
        {"i work", "{} works"},{"i live", "{} lives"}, {"i own", "{} owns"},
        {"i speak", "{} speaks"}, {"i play", "{} plays"}, {"i drink", "{} drinks"},
        {"i eat", "{} eats"}};

    auto fill = [&](const std::string& pattern) {
        std::string out = pattern;
        auto pos = out.find("{}");
        out.replace(pos, 2, sp);
        return out;
    };

    std::string out;
    std::vector<std::string> words;
    {
        // split on single spaces; input is already whitespace-collapsed
        std::size_t start = 0;
        while (start <= clause.size()) {
            std::size_t end = clause.find(' ', start);
            if (end == std::string::npos) end = clause.size();
            words.push_back(clause.substr(start, end - start));
            start = end + 1;
        }
    }

    std::vector<std::string> lowered;
    lowered.reserve(words.size());
    for (const auto& w : words) lowered.push_back(lower_ascii(w));

    std::vector<std::string> result;
    for (std::size_t i = 0; i < words.size(); ++i) {
        bool replaced = false;
        for (const auto& [pat, sub] : kMulti) {
            auto space = pat.find(' ');
            if (space == std::string::npos) {
                if (lowered[i] == pat) {
                    result.push_back(fill(sub));
                    replaced = true;
                    break;
                }
            } else if (i + 1 < words.size() &&
                       lowered[i] == pat.substr(0, space) &&
                       lowered[i + 1] == pat.substr(space + 1)) {
                result.push_back(fill(sub));
                ++i;
                replaced = true;
                break;
            }
        }
        if (replaced) continue;
        if (lowered[i] == "my") {
            result.push_back(sp + "'s");
        } else if (lowered[i] == "i") {
            result.push_back(sp);
        } else if (lowered[i] == "me") {
            result.push_back(sp);
        } else {
            result.push_back(words[i]);
        }
    }
    return text::join(result, " ");
}

std::string first_clause_matching(std::string_view text_in, auto&& pred) {
    for (auto& clause : split_clauses(text_in)) {
        if (pred(clause)) return clause;
    }
    return {};
}

}  // namespace

bool episodic_signal(std::string_view text_in) {
    const std::string lowered = lower_ascii(collapse_whitespace(text_in));
    const auto toks = tokens(lowered);
    if (!any_token(toks, kFirstPerson)) return false;
    return any_token(toks, kEventVerbs) || any_phrase(lowered, kPastTimePhrases);
}

bool semantic_signal(std::string_view text_in) {
    const std::string lowered = lower_ascii(collapse_whitespace(text_in));
    const auto toks = tokens(lowered);
    if (contains_token(toks, "favorite") || contains_token(toks, "favourite")) return true;
    if (any_phrase(lowered, kPreferencePhrases)) return true;
    return has_attribute_shape(toks);
}

bool procedural_signal(std::string_view text_in) {
    const std::string lowered = lower_ascii(collapse_whitespace(text_in));
    if (any_phrase(lowered, kDirectivePhrases)) return true;
    return any_token(tokens(lowered), kDirectiveTokens);
}

std::string leading_clause(std::string_view text_in) {
    auto clauses = split_clauses(text_in);
    if (clauses.empty()) return collapse_whitespace(text_in);
    return clauses.front();
}

std::string clipped_title(std::string_view text_in, std::size_t max_chars) {
    return text::clip_at_word(leading_clause(text_in), max_chars);
}

std::string restate_declarative(std::string_view speaker, std::string_view text_in) {
    std::string clause = first_clause_matching(text_in, [](const std::string& c) {
        return semantic_signal(c);
    });
    if (clause.empty()) {
        return std::string(speaker) + " said: " + collapse_whitespace(text_in);
    }
    clause = drop_leading(std::move(clause), kLeadingConjunctions, 2);
    const std::string lowered = lower_ascii(clause);
    for (std::string_view hedge : kHedges) {
        if (lowered.size() > hedge.size() + 1 &&
            lowered.compare(0, hedge.size() + 1, std::string(hedge) + " ") == 0) {
            clause.erase(0, hedge.size() + 1);
            break;
        }
    }
    return strip_terminal_punct(to_third_person(speaker, clause));
}

std::string condense_event(std::string_view speaker, std::string_view text_in) {
    std::string clause = first_clause_matching(text_in, [](const std::string& c) {
        return any_token(tokens(c), kEventVerbs);
    });
    if (clause.empty()) clause = leading_clause(text_in);
    if (clause.empty()) return std::string(speaker);

    // drop a leading first-person subject, then sentence adverbs
    {
        std::size_t end = clause.find(' ');
        if (end != std::string::npos) {
            std::string head = lower_ascii(clause.substr(0, end));
            if (head == "i" || head == "we") clause.erase(0, end + 1);
        }
    }
    clause = drop_leading(std::move(clause), kLeadingAdverbs, 2);
    clause = strip_trailing_time(strip_terminal_punct(std::move(clause)));
    return std::string(speaker) + " " + clause;
}

std::string condense_directive(std::string_view text_in) {
    std::string clause = first_clause_matching(text_in, [](const std::string& c) {
        return procedural_signal(c);
    });
    if (clause.empty()) clause = leading_clause(text_in);
    clause = drop_leading(std::move(clause), kLeadingFillers, 2);
    return strip_terminal_punct(std::move(clause));
}

}  // namespace engram::heuristics
