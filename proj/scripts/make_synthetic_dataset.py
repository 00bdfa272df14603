#!/usr/bin/env python3
"""Generate the long synthetic dialogue fixture and its scripted replies.

Writes fixtures/synthetic600.json (600 verbose turns, a handful of questions)
and fixtures/synthetic600_mock.json (one scripted reply per question). Output
is deterministic for a given seed, so the committed files can be regenerated
byte-for-byte.
"""

import argparse
import json
import random
from datetime import date, timedelta
from pathlib import Path

CITIES = ["Lisbon", "Oslo", "Denver", "Kyoto", "Austin", "Porto", "Zurich", "Leeds"]
COLORS = ["teal", "maroon", "olive", "crimson", "indigo", "amber"]
HOBBIES = ["bouldering", "watercolor painting", "archery", "birdwatching", "pottery"]
DISHES = ["ramen", "paella", "goulash", "falafel", "pho", "lasagna"]
EVENTS = [
    ("visited", "the maritime museum"),
    ("attended", "a letterpress workshop"),
    ("joined", "the community garden crew"),
    ("finished", "a half marathon"),
    ("bought", "a refurbished road bike"),
]
DEADLINES = [
    ("renew the library card", "June 30"),
    ("submit the insurance claim", "March 3"),
    ("file the expense report", "the 15th"),
    ("book the dentist appointment", "next Friday"),
    ("pay the utility bill", "May 1"),
]
FILLER = [
    "The weather kept flipping between drizzle and sunshine the whole afternoon, which made planning anything outdoors feel like a coin toss.",
    "Work has been a steady churn of meetings that could have been emails, punctuated by the occasional genuinely interesting problem.",
    "I keep meaning to reorganize the bookshelf, but every attempt ends with me sitting on the floor rereading old favorites.",
    "The neighbors adopted a very vocal beagle, so the soundtrack of the building has changed considerably this month.",
    "Traffic on the bridge was backed up for ages again, and the detour through the old quarter takes twice as long but is far prettier.",
    "There is a new bakery on the corner that somehow sells out of everything interesting before nine in the morning.",
    "My phone keeps suggesting I revisit photos from years ago, which is a pleasant if slightly melancholy way to start the day.",
    "The book club picked something dense this time, and half of us are quietly relying on the introduction and sheer optimism.",
    "I finally fixed the wobbly chair in the kitchen, which counts as the engineering triumph of my week.",
    "The commuter train smelled of fresh paint and ambition on Monday, and of wet umbrellas every day since.",
]


def pad(rng, sentences, target_words=45):
    words = sum(len(s.split()) for s in sentences)
    while words < target_words:
        extra = rng.choice(FILLER)
        sentences.append(extra)
        words += len(extra.split())
    return " ".join(sentences)


def build(seed, turn_count):
    rng = random.Random(seed)
    speakers = ["A", "B"]
    start = date(2024, 1, 2)

    turns = []
    facts = []  # (kind, speaker, payload) for question construction
    for index in range(1, turn_count + 1):
        speaker = speakers[index % 2]
        stamp = (start + timedelta(days=index // 4)).isoformat()
        roll = rng.random()
        if roll < 0.18:
            verb, obj = rng.choice(EVENTS)
            when = rng.choice(["last week", "last month", "yesterday"])
            lead = f"I {verb} {obj} {when}."
            facts.append(("event", speaker, f"{verb} {obj}"))
            text = pad(rng, [lead, rng.choice(FILLER)])
        elif roll < 0.34:
            kind = rng.random()
            if kind < 0.34:
                color = rng.choice(COLORS)
                lead = f"I realized my favorite color is {color}."
                facts.append(("color", speaker, color))
            elif kind < 0.67:
                dish = rng.choice(DISHES)
                lead = f"My go-to comfort food is {dish}."
                facts.append(("dish", speaker, dish))
            else:
                hobby = rng.choice(HOBBIES)
                lead = f"I love {hobby} more than any other way to spend a weekend."
                facts.append(("hobby", speaker, hobby))
            text = pad(rng, [lead, rng.choice(FILLER)])
        elif roll < 0.46:
            task, when = rng.choice(DEADLINES)
            lead = f"Don't forget to {task} before {when}."
            facts.append(("task", speaker, task))
            text = pad(rng, [lead, rng.choice(FILLER)])
        elif roll < 0.52:
            city = rng.choice(CITIES)
            lead = f"After a lot of back and forth, I finally moved to {city} last month."
            facts.append(("city", speaker, city))
            text = pad(rng, [lead, rng.choice(FILLER)])
        else:
            text = pad(rng, [rng.choice(FILLER), rng.choice(FILLER)])

        turns.append(
            {
                "turn_index": index,
                "speaker": speaker,
                "text": text,
                "timestamp": stamp,
            }
        )

    # questions about the LAST planted fact of each kind (later records win on ties)
    latest = {}
    for kind, speaker, payload in facts:
        latest[(kind, speaker)] = payload

    questions = []
    rules = []

    def ask(qid, text, gold, category="single-hop"):
        questions.append(
            {
                "question_id": qid,
                "conversation_id": "synthetic-600",
                "text": text,
                "gold_answer": gold,
                "category": category,
            }
        )
        rules.append({"contains": text, "answer": f"{gold}.", "wall_time": 0.25})

    qn = 0
    for (kind, speaker), payload in sorted(latest.items()):
        qn += 1
        qid = f"q{qn:02d}"
        if kind == "city":
            ask(qid, f"Which city did {speaker} move to?", payload)
        elif kind == "color":
            ask(qid, f"What is {speaker}'s favorite color?", payload)
        elif kind == "dish":
            ask(qid, f"What is {speaker}'s comfort food?", payload)
        elif kind == "hobby":
            ask(qid, f"What hobby does {speaker} love?", payload)
        elif kind == "task":
            ask(qid, f"What was {speaker} reminded to do?", payload)
        elif kind == "event":
            ask(qid, f"What did {speaker} do recently?", payload, "multi-hop")
        if qn >= 9:
            break

    questions.append(
        {
            "question_id": "q90",
            "conversation_id": "synthetic-600",
            "text": "What is the name of A's pet iguana?",
            "gold_answer": "unanswerable",
            "category": "adversarial",
        }
    )

    dataset = {
        "conversations": [{"conversation_id": "synthetic-600", "turns": turns}],
        "questions": questions,
    }
    mock = {"default": {"answer": "not enough info", "wall_time": 0.25}, "rules": rules}
    return dataset, mock


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--turns", type=int, default=600)
    parser.add_argument("--out-dir", default=str(Path(__file__).resolve().parent.parent / "fixtures"))
    args = parser.parse_args()

    dataset, mock = build(args.seed, args.turns)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "synthetic600.json").write_text(json.dumps(dataset, indent=1) + "\n")
    (out / "synthetic600_mock.json").write_text(json.dumps(mock, indent=1) + "\n")
    print(f"wrote {out/'synthetic600.json'} ({len(dataset['conversations'][0]['turns'])} turns, "
          f"{len(dataset['questions'])} questions)")


if __name__ == "__main__":
    main()
