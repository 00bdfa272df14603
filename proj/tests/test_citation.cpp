#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "engram/citation.hpp"
#include "engram/factcards.hpp"
#include "support/oracle.hpp"

using namespace engram;

namespace {

FactCardSet cards_with(std::initializer_list<const char*> ids) {
    FactCardSet set;
    for (const char* id : ids) {
        FactCard card;
        card.card_id = id;
        card.claim = "claim";
        card.anchor = "t / A";
        set.cards.push_back(card);
    }
    return set;
}

std::string random_answer(std::mt19937_64& rng) {
    static const char* kPieces[] = {
        "The answer is ",  "[E1]",     " and ",    "[E2]",      "[E12]",  "maybe",
        "[E",              "]",        "E3",       " [X4] ",    "[e5]",   ".",
        "[E007]",          "[]",       "[E1",     "E2]",        " text ", "[E99]",
        "[[E3]]",          "[E10][E2]"};
    std::uniform_int_distribution<int> count(0, 12);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kPieces) - 1);
    std::string out;
    int n = count(rng);
    for (int i = 0; i < n; ++i) out += kPieces[pick(rng)];
    return out;
}

}  // namespace

TEST_CASE("parse finds bracketed labels in order of first appearance") {
    CHECK(parse_citations("A lives in Seattle [E1].") == std::vector<std::string>{"E1"});
    CHECK(parse_citations("[E2] then [E1] then [E2] again") ==
          std::vector<std::string>{"E2", "E1"});
    CHECK(parse_citations("no labels at all").empty());
    CHECK(parse_citations("").empty());
}

TEST_CASE("parse is strict about the label shape") {
    CHECK(parse_citations("[E]").empty());          // digits required
    CHECK(parse_citations("[e1]").empty());         // uppercase E only
    CHECK(parse_citations("[ E1]").empty());        // no spaces inside
    CHECK(parse_citations("[E1 ]").empty());
    CHECK(parse_citations("[X1]").empty());
    CHECK(parse_citations("E1").empty());           // brackets required
    CHECK(parse_citations("[E007]") == std::vector<std::string>{"E007"});  // literal label
    CHECK(parse_citations("[[E3]]") == std::vector<std::string>{"E3"});
    CHECK(parse_citations("[E10][E2]") == std::vector<std::string>{"E10", "E2"});
}

TEST_CASE("validate flags exactly the unknown labels") {
    auto cards = cards_with({"E1", "E2", "E3"});

    auto ok = validate({"E1"}, cards);
    CHECK(ok.valid);
    CHECK(ok.cited == std::vector<std::string>{"E1"});
    CHECK(ok.invalid.empty());
    CHECK_FALSE(ok.uncited_answer);

    auto bad = validate({"E9"}, cards);
    CHECK_FALSE(bad.valid);
    CHECK(bad.invalid == std::vector<std::string>{"E9"});

    auto none = validate({}, cards);
    CHECK(none.valid);  // vacuous subset
    CHECK(none.uncited_answer);

    auto padded = validate({"E007"}, cards);  // E007 is not E7, and not in the set
    CHECK_FALSE(padded.valid);
}

TEST_CASE("check_answer ties parse and validate together") {
    auto cards = cards_with({"E1", "E2", "E3"});
    auto report = check_answer("A lives in Seattle [E1].", cards);
    CHECK(report.valid);
    CHECK(report.cited == std::vector<std::string>{"E1"});
    CHECK_FALSE(report.uncited_answer);

    auto mixed = check_answer("See [E2] and [E9].", cards);
    CHECK_FALSE(mixed.valid);
    CHECK(mixed.cited == std::vector<std::string>{"E2", "E9"});
    CHECK(mixed.invalid == std::vector<std::string>{"E9"});
}

TEST_CASE("fuzzed answers agree with the regex oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> card_count(0, 8);
    for (int round = 0; round < 2000; ++round) {
        std::string answer = random_answer(rng);

        FactCardSet cards;
        std::vector<std::string> ids;
        int n = card_count(rng);
        for (int i = 1; i <= n; ++i) {
            FactCard card;
            card.card_id = "E" + std::to_string(i);
            card.claim = "c";
            card.anchor = "t / A";
            cards.cards.push_back(card);
            ids.push_back(card.card_id);
        }

        auto expected = oracle::check(answer, ids);
        auto got = check_answer(answer, cards);
        CHECK(got.cited == expected.cited);
        CHECK(got.invalid == expected.invalid);
        CHECK(got.uncited_answer == expected.uncited);
        CHECK(got.valid == expected.valid);
    }
}
