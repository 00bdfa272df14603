#include "engram/text.hpp"

#include <cctype>

namespace engram::text {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

}  // namespace

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (unsigned char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(c));
    }
    return out;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string normalize_body(std::string_view s) { return lower_ascii(collapse_whitespace(s)); }

std::vector<std::string> tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : s) {
        if (is_word_char(c)) {
            cur.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

long long estimate_tokens(std::string_view s) {
    long long count = 0;
    bool in_word = false;
    for (unsigned char c : s) {
        if (is_word_char(c)) {
            if (!in_word) {
                ++count;
                in_word = true;
            }
        } else {
            in_word = false;
            if (!is_space(c)) ++count;  // each punctuation mark counts as one token
        }
    }
    return count;
}

std::vector<std::string> split_clauses(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        std::string piece = collapse_whitespace(cur);
        if (!piece.empty()) out.push_back(std::move(piece));
        cur.clear();
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        unsigned char c = s[i];
        if (c == '.' || c == ';' || c == ',' || c == ':') {
            flush();
            continue;
        }
        if (c == '-') {
            // a dash run ("--") or a spaced dash (" - ") separates clauses;
            // an intra-word hyphen does not.
            std::size_t j = i;
            while (j < s.size() && s[j] == '-') ++j;
            bool run = (j - i) >= 2;
            bool spaced = (i == 0 || is_space(s[i - 1])) && (j >= s.size() || is_space(s[j]));
            if (run || spaced) {
                flush();
                i = j - 1;
                continue;
            }
        }
        if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
            (static_cast<unsigned char>(s[i + 2]) == 0x93 || static_cast<unsigned char>(s[i + 2]) == 0x94)) {
            // en/em dash
            flush();
            i += 2;
            continue;
        }
        cur.push_back(static_cast<char>(c));
    }
    flush();
    return out;
}

bool is_iso_timestamp(std::string_view s) {
    auto digit = [&](std::size_t i) { return i < s.size() && s[i] >= '0' && s[i] <= '9'; };
    if (s.size() < 10) return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!digit(i)) return false;
    if (s[4] != '-' || s[7] != '-') return false;
    if (s.size() == 10) return true;
    if (s[10] != 'T' && s[10] != ' ') return false;
    // HH:MM with optional :SS, fractional seconds and zone suffix
    if (!(digit(11) && digit(12) && s.size() > 13 && s[13] == ':' && digit(14) && digit(15))) return false;
    std::size_t i = 16;
    if (i < s.size() && s[i] == ':') {
        if (!(digit(i + 1) && digit(i + 2))) return false;
        i += 3;
        if (i < s.size() && s[i] == '.') {
            ++i;
            if (!digit(i)) return false;
            while (digit(i)) ++i;
        }
    }
    if (i == s.size()) return true;
    if (s[i] == 'Z') return i + 1 == s.size();
    if (s[i] == '+' || s[i] == '-') {
        if (!(digit(i + 1) && digit(i + 2))) return false;
        i += 3;
        if (i < s.size() && s[i] == ':') ++i;
        if (i == s.size()) return true;
        return digit(i) && digit(i + 1) && i + 2 == s.size();
    }
    return false;
}

std::string clip_at_word(std::string_view s, std::size_t max_chars) {
    if (s.size() <= max_chars) return std::string(s);
    std::size_t cut = max_chars;
    while (cut > 0 && !is_space(static_cast<unsigned char>(s[cut]))) --cut;
    if (cut == 0) cut = max_chars;  // single huge word: hard clip
    std::string out(s.substr(0, cut));
    while (!out.empty() && is_space(static_cast<unsigned char>(out.back()))) out.pop_back();
    return out;
}

bool contains_token(const std::vector<std::string>& toks, std::string_view needle) {
    for (const auto& t : toks)
        if (t == needle) return true;
    return false;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

std::string fill_slot(std::string tpl, std::string_view slot, std::string_view value) {
    auto pos = tpl.find(slot);
    while (pos != std::string::npos) {
        tpl.replace(pos, slot.size(), value);
        pos = tpl.find(slot, pos + value.size());
    }
    return tpl;
}

std::string hex_encode(const void* data, std::size_t len) {
    static const char* digits = "0123456789abcdef";
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::string out;
    out.reserve(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back(digits[bytes[i] >> 4]);
        out.push_back(digits[bytes[i] & 0xF]);
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace engram::text
