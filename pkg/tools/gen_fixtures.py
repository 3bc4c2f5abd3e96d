#!/usr/bin/env python3
"""Regenerate the deterministic fixture set under fixtures/.

The fixtures are a 20-example toy corpus plus file-backed providers sized so
a full augmentation run takes milliseconds.  Word vectors are 16-dimensional:
a handful of hand-placed words live on axes 0-5 with pinned pairwise cosines
(so the embedding-fallback threshold behavior is exercised at known margins),
and every other word gets a seeded random unit vector confined to axes 6-15,
which keeps its cosine to the hand-placed words exactly zero.

Image vectors are the normalized mean of the original caption's word vectors
plus small seeded noise, so text-image rankings are discriminative but not
degenerate.  Everything derives from the in-repo PRNG; rerunning the script
reproduces byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from xmai.core import tokenize  # noqa: E402
from xmai.rng import SplitMix64, fnv1a64  # noqa: E402

DIM = 16

# word -> (axis, companion axis, cosine to the axis word)
_AXIS_WORDS: dict[str, tuple[int, int, float]] = {
    "dog": (0, 1, 1.0),
    "canine": (0, 1, 0.82),
    "hound": (0, 1, 0.93),
    "puppy": (0, 1, 0.55),
    "cat": (2, 3, 1.0),
    "lion": (3, 2, 1.0),
    "person": (4, 5, 1.0),
    "automobile": (5, 4, 1.0),
}

CORPUS = [
    ("x01", "a driver posing with a car", "img01", "entailment"),
    ("x02", "girl on a chair", "img02", None),
    ("x03", "A dog runs in the park .", "img03", None),
    ("x04", "the cat sat on the cat mat", "img04", "neutral"),
    ("x05", "a canine barks loudly", "img05", None),
    ("x06", "a person walks downtown", "img06", None),
    ("x07", "A table near the window .", "img07", None),
    ("x08", "the truck is parked", "img08", None),
    ("x09", "a sign near a traffic light", "img09", None),
    ("x10", "A man, his bike, and his helmet.", "img10", None),
    ("x11", "a boat floats", "img11", None),
    ("x12", "a bench in the garden", "img12", None),
    ("x13", "an old lamp by the door", "img13", None),
    ("x14", "the dog's bone lies outside", "img14", None),
    ("x15", "the hound and the puppy rest", "img15", None),
    ("x16", "a feline sleeps", "img16", None),
    ("x17", "Dog sleeps here .", "img17", None),
    ("x18", "two children playing with a ball on the beach near the water", "img18", None),
    ("x19", "a dog sleeps near that brown fence", "img19", None),
    ("x20", "a red kite flies high", "img20", "entailment"),
]

# image_id -> [(object label, attribute phrase, confidence)]; img13 is
# deliberately absent and img12 deliberately empty.
DETECTIONS: dict[str, list[tuple[str, str, float]]] = {
    "img01": [("driver", "male", 0.90), ("car", "red", 0.80)],
    "img02": [("girl", "little", 0.85), ("chair", "wooden", 0.75)],
    "img03": [("dog", "brown", 0.95), ("park", "green", 0.60)],
    "img04": [("cat", "black", 0.88)],
    "img05": [("dog", "brown", 0.70)],
    "img06": [("automobile", "red", 0.55)],
    "img07": [("table", "small wooden", 0.80), ("window", "open", 0.65)],
    "img08": [("truck", "", 0.90)],
    "img09": [("sign", "neon", 0.72), ("traffic light", "bright", 0.81)],
    "img10": [("bike", "blue", 0.77), ("helmet", "white", 0.83)],
    "img11": [("boat", "wooden", 0.66)],
    "img12": [],
    "img14": [("bone", "big", 0.74), ("dog", "brown", 0.51)],
    "img15": [("dog", "brown", 0.89)],
    "img16": [("cat", "gray", 0.70), ("lion", "golden", 0.70)],
    "img17": [("dog", "lazy", 0.92)],
    "img18": [
        ("ball", "red", 0.85),
        ("beach", "sandy", 0.78),
        ("children", "young", 0.66),
        ("water", "blue", 0.71),
    ],
    "img19": [("dog", "brown", 0.93)],
    "img20": [("kite", "big", 0.82)],
}

# key (word right after the mask) -> descending (candidate, probability)
MASKFILL: dict[str, list[tuple[str, float]]] = {
    "driver": [("male", 0.40), ("female", 0.30), ("young", 0.15)],
    "car": [
        ("red", 0.50), ("blue", 0.30), ("parked", 0.10),
        ("fast", 0.05), ("big", 0.03), ("old", 0.02),
    ],
    "girl": [("little", 0.45), ("young", 0.30), ("happy", 0.15)],
    "chair": [("wooden", 0.40), ("red", 0.30), ("comfy", 0.15)],
    "dog": [
        ("brown", 0.40), ("lazy", 0.35), ("black", 0.15),
        ("old", 0.05), ("wet", 0.03), ("happy", 0.02),
    ],
    "park": [("green", 0.45), ("busy", 0.25), ("quiet", 0.20)],
    "cat": [
        ("black", 0.50), ("white", 0.30), ("striped", 0.10),
        ("small", 0.06), ("old", 0.04),
    ],
    "canine": [("brown", 0.40), ("fierce", 0.30), ("small", 0.20)],
    "table": [("wooden", 0.40), ("small", 0.35), ("round", 0.15)],
    "window": [("open", 0.45), ("closed", 0.35), ("big", 0.10)],
    "truck": [("parked", 0.50), ("big", 0.30), ("dirty", 0.15)],
    "sign": [("neon", 0.35), ("big", 0.33), ("old", 0.22)],
    "traffic": [("bright", 0.40), ("busy", 0.35), ("red", 0.15)],
    "bike": [("blue", 0.45), ("fast", 0.30), ("old", 0.15)],
    "helmet": [("white", 0.50), ("shiny", 0.30), ("heavy", 0.10)],
    "boat": [("the", 0.50), ("a", 0.30), ("an", 0.20)],
    "bone": [("big", 0.45), ("small", 0.35), ("old", 0.15)],
    "hound": [("brown", 0.42), ("old", 0.33), ("gray", 0.20)],
    "puppy": [("brown", 0.40), ("small", 0.35), ("happy", 0.20)],
    "feline": [("gray", 0.40), ("golden", 0.35), ("soft", 0.20)],
    "children": [("young", 0.50), ("happy", 0.30), ("small", 0.15)],
    "ball": [("red", 0.45), ("big", 0.35), ("new", 0.15)],
    "beach": [("sandy", 0.50), ("busy", 0.30), ("warm", 0.15)],
    "water": [("blue", 0.55), ("cold", 0.30), ("deep", 0.10)],
    "kite": [
        ("red", 0.45), ("big", 0.35), ("small", 0.15),
        ("new", 0.03), ("blue", 0.02),
    ],
}

NOUNS = [
    "driver", "car", "girl", "chair", "dog", "park", "cat", "mat", "canine",
    "person", "table", "window", "truck", "sign", "traffic", "light", "man",
    "bike", "helmet", "boat", "bench", "garden", "lamp", "door", "bone",
    "hound", "puppy", "feline", "children", "ball", "beach", "water",
    "fence", "kite", "automobile", "lion",
]
TAGGED_OTHER = [
    "posing", "runs", "sat", "barks", "walks", "floats", "lies", "rest",
    "sleeps", "playing", "flies", "parked", "downtown", "loudly", "outside",
    "high", "old", "red", "brown",
]

# Extra filler vocabulary so baseline nearest-neighbor lookups have room.
FILLER = ["tree", "house", "sun", "cloud", "river", "road", "field", "grass"]


def _axis_vector(axis: int, companion: int, cosine_to_axis: float) -> list[float]:
    vec = [0.0] * DIM
    vec[axis] = cosine_to_axis
    vec[companion] = math.sqrt(max(0.0, 1.0 - cosine_to_axis * cosine_to_axis))
    return vec


def _random_vector(word: str) -> list[float]:
    rng = SplitMix64(fnv1a64("vec:" + word))
    vec = [0.0] * DIM
    for i in range(6, DIM):
        vec[i] = rng.next_float() * 2.0 - 1.0
    norm = math.sqrt(sum(x * x for x in vec))
    return [x / norm for x in vec]


def build_vocabulary() -> dict[str, list[float]]:
    words: set[str] = set(FILLER)
    for _, text, _, _ in CORPUS:
        for lower in tokenize(text).word_lowers():
            if lower != "dog's":  # deliberately out of vocabulary
                words.add(lower)
    for entries in DETECTIONS.values():
        for label, attribute, _ in entries:
            words.update(tokenize(label).word_lowers())
            words.update(tokenize(attribute).word_lowers())
    for key, candidates in MASKFILL.items():
        words.add(key)
        words.update(word for word, _ in candidates)
    table: dict[str, list[float]] = {}
    for word in sorted(words):
        if word in _AXIS_WORDS:
            table[word] = _axis_vector(*_AXIS_WORDS[word])
        else:
            table[word] = _random_vector(word)
    # The mixed-axis word is placed exactly between its two neighbors.
    table["feline"] = [
        (a + b) / math.sqrt(2.0)
        for a, b in zip(_axis_vector(2, 3, 1.0), _axis_vector(3, 2, 1.0))
    ]
    return table


def build_image_vectors(table: dict[str, list[float]]) -> dict[str, list[float]]:
    images: dict[str, list[float]] = {}
    for _, text, image_id, _ in CORPUS:
        vectors = [table[w] for w in tokenize(text).word_lowers() if w in table]
        mean = [sum(col) / len(vectors) for col in zip(*vectors)]
        norm = math.sqrt(sum(x * x for x in mean)) or 1.0
        vec = [x / norm for x in mean]
        rng = SplitMix64(fnv1a64("img:" + image_id))
        images[image_id] = [x + (rng.next_float() - 0.5) * 0.1 for x in vec]
    return images


def write_fixtures(out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)

    def path(name: str) -> str:
        return os.path.join(out_dir, name)

    with open(path("corpus.jsonl"), "w", encoding="utf-8") as fh:
        for example_id, text, image_id, gold in CORPUS:
            record: dict = {"id": example_id, "text": text, "image_id": image_id}
            if gold is not None:
                record["gold_label"] = gold
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    with open(path("detections.json"), "w", encoding="utf-8") as fh:
        payload = {
            image_id: [
                {"object": label, "attribute": attribute, "confidence": confidence}
                for label, attribute, confidence in entries
            ]
            for image_id, entries in DETECTIONS.items()
        }
        json.dump(payload, fh, ensure_ascii=False, indent=2)
        fh.write("\n")

    table = build_vocabulary()
    with open(path("word_embeddings.txt"), "w", encoding="utf-8") as fh:
        for word, vec in table.items():
            fh.write(word + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")

    images = build_image_vectors(table)
    with open(path("image_embeddings.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {k: [round(x, 6) for x in v] for k, v in images.items()},
            fh,
            indent=2,
        )
        fh.write("\n")

    with open(path("maskfill.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {k: [[w, p] for w, p in v] for k, v in sorted(MASKFILL.items())},
            fh,
            indent=2,
        )
        fh.write("\n")

    with open(path("pos_lexicon.tsv"), "w", encoding="utf-8") as fh:
        for word in sorted(NOUNS):
            fh.write(f"{word}\tnoun\n")
        for word in sorted(TAGGED_OTHER):
            fh.write(f"{word}\tother\n")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=os.path.join(os.path.dirname(__file__), "..", "fixtures"),
    )
    args = parser.parse_args()
    write_fixtures(os.path.normpath(args.out))
    print(f"fixtures written to {os.path.normpath(args.out)}")


if __name__ == "__main__":
    main()
