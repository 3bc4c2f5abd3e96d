"""Text-only baseline augmenters used for comparison runs.

Two methods: independent word deletion, and a reduced EDA-style combination
of synonym replacement, insertion, swap, and deletion.  Synonyms come from
embedding nearest neighbors rather than a lexical database, which keeps the
package self-contained; this is a deliberate deviation from classic EDA.

Both augmenters are pure given a PRNG, so corpus-parallel runs stay
deterministic when each example gets its own derived stream.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import PUNCT, WORD, Token, TokenStream, tokenize
from .providers import WordEmbeddingTable
from .rng import SplitMix64

BASELINE_KINDS = ("deletion", "eda")

# Bounded retries when sampling swap pairs, mirroring classic EDA.
_SWAP_ATTEMPTS = 3


@dataclass(frozen=True)
class BaselineConfig:
    kind: str
    rate_alpha: float
    seed: int

    def __post_init__(self) -> None:
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"unknown baseline kind {self.kind!r}")
        if not 0.0 <= self.rate_alpha <= 1.0:
            raise ValueError(f"rate/alpha {self.rate_alpha} outside [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


def detokenize(tokens: list[Token]) -> str:
    """Join word tokens with single spaces; punctuation attaches directly."""
    parts: list[str] = []
    for tok in tokens:
        if parts and tok.kind == WORD:
            parts.append(" ")
        parts.append(tok.surface)
    return "".join(parts)


def _rebuild(tokens: list[Token]) -> TokenStream:
    return tokenize(detokenize(tokens))


def delete_augment(stream: TokenStream, rate: float, prng: SplitMix64) -> TokenStream:
    """Drop each word token independently with probability `rate`.

    Punctuation tokens are never deleted.  If every word token would be
    dropped, the first one is kept so nonempty input never empties out.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"deletion rate {rate} outside [0, 1]")
    word_positions = stream.word_indices()
    doomed = {i for i in word_positions if prng.next_float() < rate}
    if word_positions and len(doomed) == len(word_positions):
        doomed.discard(word_positions[0])
    kept = [tok for i, tok in enumerate(stream.tokens) if i not in doomed]
    return _rebuild(kept)


def _eda_n(alpha: float, word_count: int) -> int:
    # floor(x + 0.5) instead of round() so .5 cases never bank to even.
    return max(1, int(alpha * word_count + 0.5))


def _replace_synonyms(
    tokens: list[Token], n: int, table: WordEmbeddingTable, prng: SplitMix64
) -> None:
    candidates = [
        i
        for i, tok in enumerate(tokens)
        if tok.kind == WORD and table.nearest(tok.lower) is not None
    ]
    if not candidates:
        return
    order = candidates[:]
    prng.shuffle(order)
    for i in sorted(order[:n]):
        neighbor = table.nearest(tokens[i].lower)
        assert neighbor is not None  # filtered above
        tokens[i] = Token(neighbor[0], neighbor[0], WORD)


def _insert_neighbors(
    tokens: list[Token], n: int, table: WordEmbeddingTable, prng: SplitMix64
) -> None:
    for _ in range(n):
        sources = [
            tok.lower
            for tok in tokens
            if tok.kind == WORD and table.nearest(tok.lower) is not None
        ]
        if not sources:
            return
        neighbor = table.nearest(prng.choice(sources))
        assert neighbor is not None
        slot = prng.randbelow(len(tokens) + 1)
        tokens.insert(slot, Token(neighbor[0], neighbor[0], WORD))


def _swap_words(tokens: list[Token], n: int, prng: SplitMix64) -> None:
    word_positions = [i for i, tok in enumerate(tokens) if tok.kind == WORD]
    if len(word_positions) < 2:
        return
    for _ in range(n):
        for _ in range(_SWAP_ATTEMPTS):
            a = word_positions[prng.randbelow(len(word_positions))]
            b = word_positions[prng.randbelow(len(word_positions))]
            if a != b:
                tokens[a], tokens[b] = tokens[b], tokens[a]
                break


def _delete_words(tokens: list[Token], alpha: float, prng: SplitMix64) -> list[Token]:
    word_positions = [i for i, tok in enumerate(tokens) if tok.kind == WORD]
    doomed = {i for i in word_positions if prng.next_float() < alpha}
    if word_positions and len(doomed) == len(word_positions):
        doomed.discard(word_positions[0])
    return [tok for i, tok in enumerate(tokens) if i not in doomed]


def eda_augment(
    stream: TokenStream,
    alpha: float,
    prng: SplitMix64,
    synonym_table: WordEmbeddingTable,
) -> TokenStream:
    """Apply synonym replace, insert, swap, then delete, in that order.

    Each sub-operation touches n = max(1, round(alpha * word-count))
    positions, with n computed once from the input.  Out-of-vocabulary words
    are skipped by the synonym steps; with an empty table the method
    degenerates to swap + delete.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha {alpha} outside [0, 1]")
    word_count = len(stream.word_indices())
    if word_count == 0:
        return stream
    n = _eda_n(alpha, word_count)
    tokens = list(stream.tokens)
    _replace_synonyms(tokens, n, synonym_table, prng)
    _insert_neighbors(tokens, n, synonym_table, prng)
    _swap_words(tokens, n, prng)
    tokens = _delete_words(tokens, alpha, prng)
    return _rebuild(tokens)
