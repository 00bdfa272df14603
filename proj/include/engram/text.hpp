#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace engram::text {

/// Trims ends and collapses every whitespace run (spaces, tabs, newlines) to one space.
std::string collapse_whitespace(std::string_view s);

/// ASCII lowercase; bytes outside A-Z pass through unchanged.
std::string lower_ascii(std::string_view s);

/// Canonical form used as the retrieval dedup key: case-folded + whitespace-collapsed.
std::string normalize_body(std::string_view s);

/// Lowercased word tokens. A word is a maximal run of alphanumeric bytes
/// (bytes >= 0x80 are treated as word characters so UTF-8 sequences stay intact).
std::vector<std::string> tokens(std::string_view s);

/// Local token-count estimator: words plus standalone punctuation marks.
/// Used whenever a provider does not report usage itself.
long long estimate_tokens(std::string_view s);

/// Splits on clause boundaries: '.', ';', ',', ':' and dash runs ("--", " - ", em dash).
/// Pieces are whitespace-collapsed; empty pieces are dropped.
std::vector<std::string> split_clauses(std::string_view s);

/// True when s looks like a machine-parsable ISO-8601 date or date-time
/// ("2024-05-10", "2024-05-10T09:30:00Z", "2024-05-10 09:30").
bool is_iso_timestamp(std::string_view s);

/// Clips to at most max_chars, cutting at a word boundary when possible.
std::string clip_at_word(std::string_view s, std::size_t max_chars);

bool contains_token(const std::vector<std::string>& toks, std::string_view needle);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Replaces every occurrence of `slot` (e.g. "{Q1}") with `value`.
std::string fill_slot(std::string tpl, std::string_view slot, std::string_view value);

std::string hex_encode(const void* data, std::size_t len);

std::uint64_t fnv1a64(std::string_view s);

/// splitmix64 step; deterministic across platforms.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace engram::text
