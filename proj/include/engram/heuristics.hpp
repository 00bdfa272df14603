#pragma once

#include <string>
#include <string_view>

// Keyword/shape rules backing the default router and the template
// extractor/claim policies. Everything here is deterministic and operates on
// a single utterance; no dialogue context, no entity linking.
namespace engram::heuristics {

// First-person past-event content ("I finally moved to Seattle last year").
bool episodic_signal(std::string_view text);

// Preference/attribute statements ("my favorite color is green").
bool semantic_signal(std::string_view text);

// Imperatives, deadlines, how-to content ("don't forget to file...").
bool procedural_signal(std::string_view text);

// First clause of the utterance, whitespace-collapsed; the whole utterance
// when it has a single clause.
std::string leading_clause(std::string_view text);

// leading_clause clipped to max_chars at a word boundary (titles).
std::string clipped_title(std::string_view text, std::size_t max_chars = 60);

// Declarative third-person restatement of a preference/attribute clause:
// "and I realized my favorite color is green" -> "A's favorite color is green".
// Falls back to "<speaker> said: <utterance>" when no trigger clause exists.
std::string restate_declarative(std::string_view speaker, std::string_view text);

// Condensed event claim: picks the event clause, drops the first-person
// subject and leading adverbs, strips a trailing relative-time phrase, and
// prefixes the speaker: "A moved to Seattle".
std::string condense_event(std::string_view speaker, std::string_view text);

// Condensed directive claim: the trigger clause minus leading fillers,
// no speaker prefix: "don't forget to file your tax return before April 15".
std::string condense_directive(std::string_view text);

}  // namespace engram::heuristics
