#!/usr/bin/env python3
"""Regenerates the synthetic archive dumps and human label files.

Run from the repository root: python3 fixtures/make_fixtures.py

Every post is drawn from one of a few templates whose intended label is
known, so the human label files can be written without running the
pipeline. Output is fully determined by SEED.
"""

import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

SEED = 20240611
ROOT = Path(__file__).resolve().parent
T0 = datetime(2023, 3, 1, tzinfo=timezone.utc)

CITIES = [
    "Albany", "Baltimore", "Boston", "Buffalo", "Chicago", "Cincinnati", "Cleveland",
    "Dayton", "Denver", "Detroit", "Hartford", "Houston", "Louisville", "Memphis",
    "Milwaukee", "Nashville", "Newark", "Omaha", "Philadelphia", "Pittsburgh",
    "Providence", "Richmond", "Scranton", "Syracuse", "Tacoma", "Toledo", "Tulsa",
    "Wheeling", "Worcester", "Youngstown",
]
STATES = [
    "Ohio", "Pennsylvania", "Michigan", "New York", "New Jersey", "Maryland",
    "Massachusetts", "Kentucky", "Missouri", "Tennessee", "Illinois", "Connecticut",
]
RIVERS = ["Ohio River", "Hudson River", "Allegheny River", "Delaware River", "Mississippi River"]
STRUCTURES = ["bridge", "overpass", "parking garage", "viaduct", "tunnel", "dam", "rail trestle"]
DEFECTS = [
    "cracks all through the deck", "rust eating the beams", "potholes you could lose a tire in",
    "concrete crumbling off the sides", "exposed rebar that looks unsafe",
    "a dangerous lean on one side", "pieces falling apart every winter",
]
FUTURE = [
    "It won't be long before someone gets hurt.",
    "That thing is gonna come down any day now.",
    "It is a disaster waiting to happen.",
    "{city} is next, mark my words.",
    "Somebody is going to die on it.",
    "I swear it will collapse under rush hour traffic.",
]
KEYWORD_TAILS = [
    "Our infrastructure is a joke.",
    "This is what decades of ignoring infrastructure gets you.",
    "Nobody in charge cares about infrastructure until it fails.",
    "Infrastructure concern should be the top issue here.",
]
CHATTER = [
    "Great game last night, the defense finally showed up.",
    "Anyone have a good recipe for chili? Asking for a cookoff.",
    "This channel keeps getting better, subscribed.",
    "Lol the comments here are wild.",
    "Who else is watching this at 3am.",
    "My cat knocked my coffee over again this morning.",
    "That thumbnail is pure clickbait.",
    "The audio in this one is way too quiet.",
]
POLITICS_TITLES = [
    ("Senate debates the infrastructure bill", "Live coverage of the infrastructure package vote."),
    ("Town hall on roads and bridges", "Infrastructure spending questions from voters."),
    ("Infrastructure week panel", "Analysts argue over who pays for repairs."),
]


def pick(rng, xs):
    return xs[rng.randrange(len(xs))]


def place(rng):
    r = rng.random()
    if r < 0.5:
        return pick(rng, CITIES)
    if r < 0.8:
        return f"{pick(rng, CITIES)}, {pick(rng, STATES)}"
    return f"the {pick(rng, RIVERS)} near {pick(rng, CITIES)}"


def concern(rng, keyword=True):
    city = pick(rng, CITIES)
    d1, d2 = rng.sample(DEFECTS, 2)
    s = pick(rng, STRUCTURES)
    text = f"The {s} in {place(rng)} has {d1} and {d2}. {pick(rng, FUTURE).format(city=city)}"
    if keyword:
        text += " " + pick(rng, KEYWORD_TAILS)
    return text


def lookalike(rng):
    s = pick(rng, STRUCTURES)
    return (
        f"{pick(rng, CITIES)} is finally going to repair the {s} on {pick(rng, ['Main St', 'Route 9', 'the east side', 'the old mill road'])}, "
        f"no more rust and cracks. Good to see infrastructure money at work."
    )


def unlocated(rng):
    d1, d2 = rng.sample(DEFECTS, 2)
    return (
        f"There's a {pick(rng, STRUCTURES)} {pick(rng, ['near where I live', 'on my commute', 'by my kids school', 'down the road from me'])} "
        f"with {d1} and {d2}, it's gonna fall one day. Infrastructure in this country is sad."
    )


def past(rng):
    event = pick(rng, [
        "Pittsburgh bridge collapse", "Fern Hollow Bridge Collapse", "Ohio train derailment",
        "Champlain Towers South collapse", "I-85 Overpass collapse",
    ])
    return (
        f"The {event} was a tragedy for {pick(rng, CITIES)}. Reports said the bridge had rust "
        f"and cracks for years. {pick(rng, ['Thoughts to the families.', 'Hard to watch the footage.', 'Never forget.', 'Awful day.'])}"
    )


def weak(rng):
    return pick(rng, [
        "Infrastructure week again lol.",
        "The infrastructure bill is mostly pork if you ask me.",
        "The infrastructure debate keeps ignoring the bridge repair backlog.",
        "Another infrastructure hearing, another nothing burger.",
        "Did anyone read the infrastructure report, the bridge section was thin.",
    ]) + f" ({rng.randrange(10_000)})"


def offtopic_concern(rng):
    d1, d2 = rng.sample(DEFECTS, 2)
    return f"The {pick(rng, STRUCTURES)} in {pick(rng, CITIES)} has {d1} and {d2}. It is a disaster waiting to happen."


TEMPLATES = [
    ("concern", 1, 0.26, lambda rng: concern(rng)),
    ("concern_nokw", 1, 0.06, lambda rng: offtopic_concern(rng)),
    ("lookalike", 0, 0.14, lookalike),
    ("unlocated", 0, 0.10, unlocated),
    ("past", 0, 0.10, past),
    ("weak", 0, 0.14, weak),
    ("chatter", 0, 0.20, lambda rng: pick(rng, CHATTER) + f" #{rng.randrange(100_000)}"),
]


def draw(rng):
    r = rng.random()
    acc = 0.0
    for name, label, w, fn in TEMPLATES:
        acc += w
        if r < acc:
            return name, label, fn(rng)
    name, label, _, fn = TEMPLATES[-1]
    return name, label, fn(rng)


def fingerprint(text):
    return " ".join(text.split()).lower()


def main():
    rng = random.Random(SEED)
    seen = set()
    truth = {}
    eligible = set()
    dumps = {"reddit": [], "youtube_targeted": [], "youtube_politics": []}
    plan = [("reddit", 220), ("youtube_targeted", 120), ("youtube_politics", 58)]
    n = 0
    for dump, count in plan:
        platform = "reddit" if dump == "reddit" else "youtube"
        made = 0
        while made < count:
            kind, label, text = draw(rng)
            if dump == "youtube_politics" and kind in ("concern_nokw",):
                continue
            fp = fingerprint(text)
            if fp in seen:
                continue
            seen.add(fp)
            n += 1
            made += 1
            rid = f"t1_{n:05x}" if platform == "reddit" else f"Ugx{n:06d}"
            rec = {
                "id": rid,
                "body": text,
                "author": f"user{rng.randrange(5000)}",
                "created": int((T0 + timedelta(minutes=37 * n)).timestamp()),
            }
            if dump == "reddit":
                rec["container_id"] = pick(rng, ["news", "pittsburgh", "civilengineering", "ohio", "AskReddit"])
            elif dump == "youtube_targeted":
                rec["container_id"] = f"vid{rng.randrange(40):03d}"
                rec["container_title"] = "Bridge collapse footage"
            else:
                title, desc = pick(rng, POLITICS_TITLES)
                rec["container_id"] = f"pol{rng.randrange(12):03d}"
                rec["container_title"] = title
                rec["container_description"] = desc
            dumps[dump].append(rec)
            truth[f"{platform}:{rid}"] = (kind, label, text)
            if dump != "youtube_politics":
                eligible.add(f"{platform}:{rid}")

    # Edge cases: one long premise and one batch refusal, both kept out of
    # the wild-eligible partitions so the main corpus always has them.
    title, desc = POLITICS_TITLES[0]
    for text in (concern(rng) + " " + " ".join(["The repair crews never show up."] * 45),
                 "[refuse] " + concern(rng)):
        n += 1
        rid = f"Ugx{n:06d}"
        dumps["youtube_politics"].append({
            "id": rid, "body": text, "author": "user77",
            "created": int((T0 + timedelta(minutes=37 * n)).timestamp()),
            "container_id": "pol000", "container_title": title,
            "container_description": desc,
        })
        truth[f"youtube:{rid}"] = ("concern", 1, text)

    # Ingest noise: repeated ids, text duplicates under fresh ids, malformed lines.
    reddit = dumps["reddit"]
    extra = [dict(reddit[i]) for i in (3, 50, 120, 200)]
    for i in (10, 60, 140):
        n += 1
        dup = dict(reddit[i])
        dup["id"] = f"t1_{n:05x}"
        dup["created"] = reddit[i]["created"] + 600
        dup["body"] = "  " + reddit[i]["body"].upper() + "  "
        extra.append(dup)
    lines = {k: [json.dumps(r, ensure_ascii=False) for r in v] for k, v in dumps.items()}
    lines["reddit"] += [json.dumps(r, ensure_ascii=False) for r in extra]
    lines["reddit"].insert(77, "{not json")
    lines["youtube_targeted"].insert(5, json.dumps({"id": "Ugx_nobody", "author": "x"}))

    for k, ls in lines.items():
        (ROOT / "archive" / f"{k}.jsonl").write_text("\n".join(ls) + "\n")

    write_labels(rng, truth, eligible)


def stamp(i):
    return (T0 + timedelta(days=40, seconds=90 * i)).strftime("%Y-%m-%dT%H:%M:%SZ")


def write_labels(rng, truth, eligible):
    crowd = {
        "democrat": ["dem-01", "dem-02", "dem-03"],
        "republican": ["rep-01", "rep-02", "rep-03"],
        "independent": ["ind-01", "ind-02", "ind-03"],
    }
    records = []
    clock = 0

    def add(post, who, aff, label):
        nonlocal clock
        clock += 1
        records.append({
            "post_id": post, "annotator_id": who, "affiliation": aff,
            "label": "positive" if label else "negative", "noted_at": stamp(clock),
        })

    # Posts the rule annotator is expected to keep: located warnings and the
    # located lookalikes. Records for posts the cascade drops are ignored.
    targets = sorted(p for p, (k, _, _) in truth.items() if k in ("concern", "lookalike"))
    for i, post in enumerate(targets):
        label = truth[post][1]
        votes = []
        for aff, pool in crowd.items():
            v = label if rng.random() > 0.12 else 1 - label
            votes.append(v)
            add(post, pool[i % len(pool)], aff, v)
        if sum(votes) >= 2:
            e = [label if rng.random() > 0.08 else 1 - label for _ in range(2)]
            add(post, "expert-a", "expert", e[0])
            add(post, "expert-b", "expert", e[1])
            if e[0] != e[1]:
                add(post, "expert-c", "tiebreaker", label)
    with open(ROOT / "labels" / "annotations.jsonl", "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")

    audit = []
    # Audit labels cover every post that can land in the wild reserve.
    for i, post in enumerate(sorted(eligible)):
        label = truth[post][1]
        v = label if rng.random() > 0.05 else 1 - label
        audit.append({
            "post_id": post, "annotator_id": "auditor-1", "affiliation": "expert",
            "label": "positive" if v else "negative", "noted_at": stamp(100_000 + i),
        })
    with open(ROOT / "labels" / "audit.jsonl", "w") as f:
        for r in audit:
            f.write(json.dumps(r) + "\n")


if __name__ == "__main__":
    main()
