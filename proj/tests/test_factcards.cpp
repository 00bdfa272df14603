#include <string>

#include "doctest.h"
#include "engram/errors.hpp"
#include "engram/factcards.hpp"
#include "engram/providers.hpp"
#include "engram/retrieval.hpp"
#include "support/generators.hpp"

using namespace engram;

namespace {

TypedRecord record_of(MemoryType type, const std::string& speaker, const std::string& body,
                      const std::string& anchor = "2024-05-10", const std::string& title = "") {
    TypedRecord record;
    record.record_id = 42;
    record.conversation_id = "c1";
    record.speaker = speaker;
    record.memory_type = type;
    record.title = title;
    record.body = body;
    record.anchor = anchor;
    return record;
}

EvidenceBundle bundle_of(std::initializer_list<TypedRecord> a_bank,
                         std::initializer_list<TypedRecord> b_bank) {
    EvidenceBundle bundle;
    double score = 0.99;
    for (const auto& record : a_bank) bundle.per_speaker["A"].push_back({record, score -= 0.01});
    for (const auto& record : b_bank) bundle.per_speaker["B"].push_back({record, score -= 0.01});
    return bundle;
}

}  // namespace

TEST_CASE("template claims by type: semantic verbatim, episodic condensed, procedural condensed") {
    ClaimPolicy policy;

    auto semantic = record_of(MemoryType::semantic, "A", "A's favorite color is green");
    auto card = render_card(semantic, 3, policy);
    CHECK(card.card_id == "E3");
    CHECK(card.claim == "A's favorite color is green");
    CHECK(card.anchor == "2024-05-10 / A");
    CHECK(card.record_ref == 42);
    CHECK_FALSE(card.template_claim);  // flag marks provider *fallback*, not the default policy

    auto episodic = record_of(
        MemoryType::episodic, "A",
        "After months of searching for a new role and packing up my old apartment, I finally "
        "moved to Seattle last year. It took a while to adjust.");
    CHECK(render_card(episodic, 1, policy).claim == "A moved to Seattle");

    auto procedural = record_of(
        MemoryType::procedural, "B",
        "That's exciting. Just don't forget to file your tax return before April 15 - the "
        "deadline is strict.");
    CHECK(render_card(procedural, 2, policy).claim ==
          "don't forget to file your tax return before April 15");
}

TEST_CASE("card ids and anchors come from position and record") {
    ClaimPolicy policy;
    auto record = record_of(MemoryType::semantic, "B", "the sky is blue", "turn 9");
    auto card = render_card(record, 7, policy);
    CHECK(card.card_id == "E7");
    CHECK(card.anchor == "turn 9 / B");
    CHECK_THROWS_AS(render_card(record, 0, policy), PreconditionError);
}

TEST_CASE("card line format") {
    FactCard card;
    card.card_id = "E1";
    card.claim = "A moved to Seattle";
    card.anchor = "2024-05-10 / A";
    CHECK(card_line(card) == "[E1] A moved to Seattle (2024-05-10 / A)");
}

TEST_CASE("render_set assigns sequential ids in bundle order, A bank first") {
    auto bundle = bundle_of(
        {record_of(MemoryType::episodic, "A", "I moved to Seattle last year."),
         record_of(MemoryType::semantic, "A", "A's favorite color is green")},
        {record_of(MemoryType::procedural, "B", "don't forget to file your tax return.")});

    FactCardSet cards = render_set(bundle, ClaimPolicy{});
    REQUIRE(cards.cards.size() == 3);
    CHECK(cards.ids() == std::vector<std::string>{"E1", "E2", "E3"});
    CHECK(cards.cards[0].anchor.back() == 'A');
    CHECK(cards.cards[2].anchor.back() == 'B');
    CHECK(cards.has("E2"));
    CHECK_FALSE(cards.has("E4"));
    CHECK_FALSE(cards.has("E02"));  // labels are literal

    auto empty = render_set(EvidenceBundle{}, ClaimPolicy{});
    CHECK(empty.cards.empty());
    CHECK(empty.render_lines().empty());
}

TEST_CASE("rendering is a bijection over the bundle") {
    auto corpus = gen::make_corpus(404, {.max_records = 60});
    MockEncoder encoder(corpus.dim, 5);
    auto query = make_query("probe", "c1", encoder);
    auto bundle = retrieve(*corpus.store, query, {});

    auto cards = render_set(bundle, ClaimPolicy{});
    auto flat = bundle.flatten();
    REQUIRE(cards.cards.size() == flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        CHECK(cards.cards[i].card_id == "E" + std::to_string(i + 1));
        CHECK(cards.cards[i].record_ref == flat[i].record.record_id);
        CHECK_FALSE(cards.cards[i].claim.empty());
    }
}

TEST_CASE("template claims never inflate much beyond the body") {
    auto corpus = gen::make_corpus(505, {.max_records = 80});
    ClaimPolicy policy;
    for (const auto& record : corpus.records) {
        auto card = render_card(record, 1, policy);
        CHECK(card.claim.size() <= record.body.size() + record.speaker.size() + 4);
    }
}

TEST_CASE("provider-backed claims are used when single-sentence, else template fallback") {
    auto script = MockScript::parse(R"({
        "default": {"answer": "B reminded A to file the tax form by April 15"}
    })");
    MockChatProvider provider{script};

    ClaimPolicy policy;
    policy.kind = ClaimPolicyKind::provider;
    policy.provider = &provider;
    policy.question = "When is the tax form due?";

    auto record = record_of(MemoryType::procedural, "B",
                            "don't forget to file your tax return before April 15");
    auto card = render_card(record, 1, policy);
    CHECK(card.claim == "B reminded A to file the tax form by April 15");
    CHECK_FALSE(card.template_claim);

    // multi-sentence replies are cut at the first sentence
    auto chatty = MockScript::parse(R"({
        "default": {"answer": "A moved. Also some other rambling. And more."}
    })");
    MockChatProvider chatty_provider{chatty};
    policy.provider = &chatty_provider;
    CHECK(render_card(record, 1, policy).claim == "A moved");

    // an overlong reply falls back to the template claim
    std::string longtext(400, 'x');
    auto overlong = MockScript::parse(R"({"default": {"answer": ")" + longtext + R"("}})");
    MockChatProvider overlong_provider{overlong};
    policy.provider = &overlong_provider;
    auto fallback = render_card(record, 1, policy);
    CHECK(fallback.template_claim);
    CHECK(fallback.claim == "don't forget to file your tax return before April 15");
}

TEST_CASE("claims stay single-sentence under the template policy") {
    ClaimPolicy policy;
    auto record = record_of(MemoryType::semantic, "A", "one clause only");
    auto card = render_card(record, 1, policy);
    CHECK(card.claim.find(". ") == std::string::npos);
}
