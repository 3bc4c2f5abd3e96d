"""Pretrained-model capabilities behind uniform interfaces.

Every capability the pipeline needs (mask filling, text/image embedding,
PoS tagging, word vectors) is served either by a deterministic file-backed
fixture defined here or by a remote process speaking the line protocol in
:mod:`xmai.remote`.  Fixtures are pure functions of their files, so repeated
queries always return identical results.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .core import WORD, TokenStream

log = logging.getLogger(__name__)


class ProviderError(Exception):
    """A provider could not answer; pipelines surface this, never mask it."""


def cosine(u, v) -> float:
    """Cosine similarity in [-1, 1]; zero-norm inputs are defined as 0."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    value = float(np.dot(u, v) / (nu * nv))
    return max(-1.0, min(1.0, value))


@dataclass
class WordEmbeddingTable:
    """Case-insensitive word -> vector lookup with a single fixed dimension."""

    dimension: int | None = None
    entries: dict[str, np.ndarray] = field(default_factory=dict)
    _matrix_cache: tuple | None = field(default=None, repr=False, compare=False)

    @classmethod
    def load(cls, path: str) -> "WordEmbeddingTable":
        """Parse GloVe-style text: one ``word v1 v2 ... vD`` line per entry."""
        table = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                parts = line.split()
                if not parts:
                    continue
                word, values = parts[0].lower(), parts[1:]
                try:
                    vector = np.array([float(x) for x in values], dtype=float)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad float ({exc})") from exc
                if table.dimension is None:
                    if len(vector) == 0:
                        raise ValueError(f"{path}:{lineno}: no vector components")
                    table.dimension = len(vector)
                elif len(vector) != table.dimension:
                    raise ValueError(
                        f"{path}:{lineno}: expected {table.dimension} components, "
                        f"got {len(vector)}"
                    )
                if word in table.entries:
                    log.warning("duplicate embedding for %r at %s:%d (last wins)", word, path, lineno)
                table.entries[word] = vector
        return table

    def add(self, word: str, vector) -> None:
        vector = np.asarray(vector, dtype=float)
        if self.dimension is None:
            self.dimension = len(vector)
        elif len(vector) != self.dimension:
            raise ValueError("vector dimension mismatch")
        self.entries[word.lower()] = vector
        self._matrix_cache = None

    def lookup(self, word: str) -> np.ndarray | None:
        return self.entries.get(word.lower())

    def phrase_vector(self, words) -> np.ndarray | None:
        """Mean vector over the in-vocabulary words; None when none are known."""
        vectors = [v for v in (self.lookup(w) for w in words) if v is not None]
        if not vectors:
            return None
        return np.mean(vectors, axis=0)

    def nearest(self, word: str, exclude_self: bool = True) -> tuple[str, float] | None:
        """Nearest neighbor by cosine; ties broken alphabetically."""
        query = self.lookup(word)
        if query is None:
            return None
        if self._matrix_cache is None:
            words = sorted(self.entries)
            matrix = np.stack([self.entries[w] for w in words]) if words else np.zeros((0, 0))
            norms = np.linalg.norm(matrix, axis=1) if words else np.zeros(0)
            self._matrix_cache = (words, matrix, norms)
        words, matrix, norms = self._matrix_cache
        qnorm = float(np.linalg.norm(query))
        best: tuple[str, float] | None = None
        if qnorm == 0.0:
            return None
        sims = matrix @ query
        for i, other in enumerate(words):
            if exclude_self and other == word.lower():
                continue
            denom = norms[i] * qnorm
            sim = float(sims[i] / denom) if denom > 0 else 0.0
            # Words iterate alphabetically, so strict > keeps the first on ties.
            if best is None or sim > best[1]:
                best = (other, sim)
        return best


class FixtureMaskFill:
    """Mask filling keyed on the word immediately after the mask.

    The fixture file maps that lowercase word to a full ordered candidate
    list; a query returns its first ``k`` entries, which makes the top-k
    output a prefix of the top-(k+1) output by construction.
    """

    def __init__(self, table: dict[str, list[tuple[str, float]]]):
        for key, candidates in table.items():
            previous = None
            for word, prob in candidates:
                if prob <= 0:
                    raise ValueError(f"non-positive probability for {key!r}/{word!r}")
                if previous is not None and prob > previous:
                    raise ValueError(f"candidates for {key!r} not in descending order")
                previous = prob
        self._table = {k.lower(): [(w, float(p)) for w, p in v] for k, v in table.items()}

    @classmethod
    def load(cls, path: str) -> "FixtureMaskFill":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls({key: [(str(w), float(p)) for w, p in pairs] for key, pairs in raw.items()})

    def fill(self, tokens: list[str], mask_index: int, k: int) -> list[tuple[str, float]]:
        """Top-k candidates for a mask sitting just before ``tokens[mask_index]``."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if not 0 <= mask_index < len(tokens):
            raise ValueError(f"mask index {mask_index} outside token range")
        key = tokens[mask_index].lower()
        return list(self._table.get(key, ())[:k])


class FixtureTextEmbedder:
    """Sentence embedding as the L2-normalized mean of in-vocabulary word vectors."""

    def __init__(self, table: WordEmbeddingTable):
        self.table = table

    def embed(self, stream: TokenStream) -> np.ndarray:
        dim = self.table.dimension or 0
        mean = self.table.phrase_vector(stream.word_lowers())
        if mean is None:
            return np.zeros(dim)
        norm = float(np.linalg.norm(mean))
        if norm == 0.0:
            return np.zeros(dim)
        return mean / norm


class ImageEmbeddingMap:
    """Image-side embeddings, preloaded from a JSON map image_id -> vector."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        self._vectors = vectors

    @classmethod
    def load(cls, path: str) -> "ImageEmbeddingMap":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls({k: np.array(v, dtype=float) for k, v in raw.items()})

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._vectors

    def ids(self) -> list[str]:
        return sorted(self._vectors)

    def get(self, image_id: str) -> np.ndarray:
        try:
            return self._vectors[image_id]
        except KeyError:
            raise ProviderError(f"no image embedding for id {image_id!r}") from None


class FixturePosTagger:
    """Coarse noun/other tags from a TSV lexicon; misses default to other."""

    def __init__(self, lexicon: dict[str, str]):
        for word, tag in lexicon.items():
            if tag not in ("noun", "other"):
                raise ValueError(f"bad tag {tag!r} for {word!r}")
        self._lexicon = {w.lower(): t for w, t in lexicon.items()}

    @classmethod
    def load(cls, path: str) -> "FixturePosTagger":
        lexicon: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                try:
                    word, tag = line.split("\t")
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: expected word<TAB>tag") from exc
                lexicon[word] = tag
        return cls(lexicon)

    def tag(self, stream: TokenStream) -> list[str]:
        """One tag per token; punctuation is always tagged other."""
        return [
            self._lexicon.get(tok.lower, "other") if tok.kind == WORD else "other"
            for tok in stream.tokens
        ]


@dataclass
class ProviderBundle:
    """Everything the augmenter consumes, fixture- or remote-backed.

    The embedding tables may be None for runs that never consult them
    (the deletion baseline); the attribute-insertion path requires both.
    """

    mask_fill: object
    text_embedder: object
    pos_tagger: object
    image_embeddings: ImageEmbeddingMap | None
    match_table: WordEmbeddingTable | None
    attr_table: WordEmbeddingTable | None
