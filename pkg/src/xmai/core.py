"""Domain types, tokenization, and configuration shared by the whole pipeline."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

WORD = "word"
PUNCT = "punct"

GOLD_LABELS = ("entailment", "contradiction", "neutral")

# Token indices within three positions on either side of a mask; candidates
# duplicating any such token are rejected during mask filling.
NEIGHBORHOOD_RADIUS = 3


def _is_word_char(ch: str) -> bool:
    # Apostrophes glue contractions ("dog's") into one word token.
    return ch.isalnum() or ch == "'"


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str
    kind: str


@dataclass(frozen=True)
class TokenStream:
    """Token sequence plus the inter-token separators needed to rebuild the text.

    ``separators`` has ``len(tokens) + 1`` entries: separator ``i`` precedes
    token ``i``, and the final entry is trailing whitespace.  ``text()``
    therefore reproduces the source byte-for-byte.
    """

    tokens: tuple[Token, ...]
    separators: tuple[str, ...]

    def __post_init__(self):
        if len(self.separators) != len(self.tokens) + 1:
            raise ValueError("separator count must be token count + 1")

    def text(self) -> str:
        parts = []
        for sep, tok in zip(self.separators, self.tokens):
            parts.append(sep)
            parts.append(tok.surface)
        parts.append(self.separators[-1])
        return "".join(parts)

    def word_indices(self) -> list[int]:
        return [i for i, t in enumerate(self.tokens) if t.kind == WORD]

    def word_lowers(self) -> list[str]:
        return [t.lower for t in self.tokens if t.kind == WORD]

    def insert_word(self, index: int, surface: str) -> "TokenStream":
        """Return a new stream with ``surface`` spliced in before token ``index``.

        The inserted token inherits the separator that preceded the displaced
        token; a single space separates it from what follows.  Appending past
        the last token adds a space before the new word instead, keeping the
        original trailing whitespace at the end.
        """
        if not 0 <= index <= len(self.tokens):
            raise IndexError(f"insert index {index} out of range")
        tok = Token(surface, surface.lower(), WORD)
        tokens = self.tokens[:index] + (tok,) + self.tokens[index:]
        if index == len(self.tokens):
            lead = " " if self.tokens else ""
            separators = self.separators[:-1] + (lead, self.separators[-1])
        else:
            separators = self.separators[: index + 1] + (" ",) + self.separators[index + 1 :]
        return TokenStream(tokens, separators)


def tokenize(text: str) -> TokenStream:
    """Split text into word and punctuation tokens.

    Word tokens are maximal runs of letters, digits, and apostrophes; every
    other non-space character becomes a single punctuation token.  Whitespace
    is preserved in the separators so reconstruction is exact.
    """
    tokens: list[Token] = []
    separators: list[str] = []
    pending: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            pending.append(ch)
            i += 1
            continue
        separators.append("".join(pending))
        pending = []
        if _is_word_char(ch):
            j = i
            while j < n and _is_word_char(text[j]):
                j += 1
            surface = text[i:j]
            tokens.append(Token(surface, surface.lower(), WORD))
            i = j
        else:
            tokens.append(Token(ch, ch.lower(), PUNCT))
            i += 1
    separators.append("".join(pending))
    return TokenStream(tuple(tokens), tuple(separators))


@dataclass(frozen=True)
class MultimodalExample:
    id: str
    text: str
    image_id: str
    gold_label: str | None = None


@dataclass(frozen=True)
class Detection:
    object_label: str
    attribute_phrase: str
    confidence: float


@dataclass(frozen=True)
class DetectionRecord:
    image_id: str
    detections: tuple[Detection, ...]


EMPTY_DETECTIONS = DetectionRecord(image_id="", detections=())


@dataclass(frozen=True)
class AugmentationConfig:
    lambda1: float = 1.0
    lambda2: float = 5.0
    lambda3: float = 5.0
    k: int = 3
    threshold_t: float = 0.7
    seed: int = 0
    max_gallery: int | None = None


def validate_config(config: AugmentationConfig) -> AugmentationConfig:
    """Check config invariants; returns the config unchanged when valid."""
    if config.k < 1:
        raise ValueError(f"k must be >= 1, got {config.k}")
    if not 0.0 <= config.threshold_t <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {config.threshold_t}")
    if not 0 <= config.seed < 2**64:
        raise ValueError("seed must fit in 64 unsigned bits")
    for name in ("lambda1", "lambda2", "lambda3"):
        value = getattr(config, name)
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"{name} must be finite")
        if value < 0:
            log.info("negative %s=%s accepted (component acts in reverse)", name, value)
    return config


@dataclass(frozen=True)
class MaskSite:
    insert_before_index: int
    object_label: str
    attribute_phrase: str
    match_kind: str  # "direct" | "noun_fallback"
    match_similarity: float


@dataclass(frozen=True)
class CandidateInsertion:
    word: str
    p: float
    s: float
    d: float
    score: float


@dataclass(frozen=True)
class MaskDecision:
    site: MaskSite
    chosen: CandidateInsertion | None
    rejected: tuple[CandidateInsertion, ...]
    dropped_reason: str | None = None
    # Position of the chosen candidate within the surviving-candidate order,
    # so traces can be serialized in descending-probability order.
    chosen_index: int | None = None


@dataclass(frozen=True)
class AugmentationResult:
    example_id: str
    original_text: str
    augmented_text: str
    decisions: tuple[MaskDecision, ...]
    baseline: str | None = None

    def inserted_words(self) -> list[str]:
        return [d.chosen.word for d in self.decisions if d.chosen is not None]


def load_corpus(path: str) -> list[MultimodalExample]:
    """Read a JSON-lines corpus of image-text pairs.

    Each line carries ``id``, ``text``, ``image_id`` and optionally
    ``gold_label``.  Ids must be unique and texts nonempty after trimming.
    """
    examples: list[MultimodalExample] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            try:
                example = MultimodalExample(
                    id=str(raw["id"]),
                    text=str(raw["text"]),
                    image_id=str(raw["image_id"]),
                    gold_label=raw.get("gold_label"),
                )
            except KeyError as exc:
                raise ValueError(f"{path}:{lineno}: missing key {exc}") from exc
            if not example.text.strip():
                raise ValueError(f"{path}:{lineno}: empty text for id {example.id!r}")
            if example.gold_label is not None and example.gold_label not in GOLD_LABELS:
                raise ValueError(
                    f"{path}:{lineno}: bad gold_label {example.gold_label!r}"
                )
            if example.id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate id {example.id!r}")
            seen.add(example.id)
            examples.append(example)
    return examples


def load_detections(path: str) -> dict[str, DetectionRecord]:
    """Read the per-image detections file: image_id -> [{object, attribute, confidence}]."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: detections file must be a JSON object")
    records: dict[str, DetectionRecord] = {}
    for image_id, entries in raw.items():
        detections = []
        for entry in entries:
            label = str(entry["object"])
            if not label:
                raise ValueError(f"{path}: empty object label for image {image_id!r}")
            confidence = float(entry.get("confidence", 1.0))
            if not 0.0 <= confidence <= 1.0:
                raise ValueError(
                    f"{path}: confidence {confidence} out of [0,1] for image {image_id!r}"
                )
            detections.append(
                Detection(
                    object_label=label,
                    attribute_phrase=str(entry.get("attribute", "")),
                    confidence=confidence,
                )
            )
        records[image_id] = DetectionRecord(image_id=image_id, detections=tuple(detections))
    return records
