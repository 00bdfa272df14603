"""End-to-end smoke test for the python module."""

import os

import pytest

import engram


FIXTURES = os.environ.get("ENGRAM_FIXTURES", "fixtures")


@pytest.fixture
def walkthrough_store(tmp_path):
    store = engram.MemoryStore(str(tmp_path / "memory.db"), 32)
    encoder = engram.MockEncoder(dim=32, seed=1)
    counts = engram.ingest_file(store, os.path.join(FIXTURES, "walkthrough.json"), encoder)
    assert counts == {
        "episodic": 1,
        "semantic": 1,
        "procedural": 1,
        "skipped_existing": 0,
        "turns_processed": 3,
    }
    return store, encoder


def test_route_and_extract():
    turn = engram.DialogueTurn()
    turn.conversation_id = "c1"
    turn.turn_index = 1
    turn.speaker = "A"
    turn.text = "I finally moved to Seattle last year after living in Boise."
    turn.timestamp = "2024-05-10"

    decision = engram.route(turn)
    assert decision.episodic and not decision.procedural

    records = engram.extract(turn)
    assert len(records) == decision.popcount()
    assert records[0].memory_type == engram.MemoryType.episodic
    assert "Seattle" in records[0].body


def test_retrieve_cards_and_citations(walkthrough_store):
    store, encoder = walkthrough_store

    bundle = engram.retrieve(store, "walkthrough-1", "Where does A live?", encoder, k=25)
    assert 0 < bundle.total() <= 25
    assert "A" in bundle.per_speaker

    cards = engram.render_cards(bundle, "Where does A live?")
    lines = cards.render_lines()
    assert "[E1] A moved to Seattle (2024-05-10 / A)" in lines
    assert cards.has("E1")

    report = engram.check_answer("A lives in Seattle [E1].", cards)
    assert report.valid
    assert report.cited == ["E1"]
    assert report.invalid == []

    bad = engram.check_answer("See [E99].", cards)
    assert not bad.valid

    prompt = engram.build_prompt("Where does A live?", cards, bundle)
    assert "Q1: Where does A live?" in prompt.user_text
    assert prompt.token_estimate > 0


def test_store_roundtrip(tmp_path):
    store = engram.MemoryStore(str(tmp_path / "roundtrip.db"), 4)
    record = engram.TypedRecord()
    record.conversation_id = "c1"
    record.speaker = "B"
    record.memory_type = engram.MemoryType.semantic
    record.body = "B prefers rooibos tea"
    record.anchor = "2024-06-01"
    record.source_turn = 3
    record.embedding = [0.5, 0.5, 0.5, 0.5]

    rid = store.put(record)
    got = store.get(rid)
    assert got.body == "B prefers rooibos tea"
    assert got.embedding == [0.5, 0.5, 0.5, 0.5]
    assert store.speakers("c1") == ["B"]

    with pytest.raises(engram.EngramError):
        store.get(999)


def test_estimate_tokens():
    assert engram.estimate_tokens("Hello, world!") == 4
