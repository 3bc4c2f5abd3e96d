"""Evaluation metrics, implemented in-repo so their exact behavior is pinned.

Retrieval metrics (gallery ranking, MRR), text-overlap metrics (sentence
BLEU, a reduced METEOR variant), weighted classification metrics, and the
insertion-count statistic used by the harness summaries.  All functions are
pure and operate on plain Python values or numpy vectors.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, fields
from typing import Iterable, Mapping, Sequence

import numpy as np

from .porter import stem
from .providers import cosine

# Substituted for a zero numerator in modified n-gram precision so the
# geometric mean stays finite on partial overlaps.
BLEU_EPSILON = 1e-9


@dataclass(frozen=True)
class QueryRank:
    """Outcome of ranking one query against a gallery."""

    query_id: str
    gt_image_id: str
    rank: int
    gallery_size: int

    def __post_init__(self) -> None:
        if not 1 <= self.rank <= self.gallery_size:
            raise ValueError(
                f"query {self.query_id!r}: rank {self.rank} outside "
                f"[1, {self.gallery_size}]"
            )


@dataclass
class EvalReport:
    """One row of an evaluation table; unset fields stay None."""

    method: str = ""
    mrr: float | None = None
    sim_tt: float | None = None
    sim_it: float | None = None
    bleu: float | None = None
    meteor: float | None = None
    accuracy: float | None = None
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    mean_insertions: float | None = None
    std_insertions: float | None = None
    axiom_violation_rate: float | None = None

    def as_dict(self) -> dict:
        out: dict = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None:
                out[f.name] = value
        return out


def rank_gallery(
    query_embedding: np.ndarray,
    gallery: Mapping[str, np.ndarray],
    gt_image_id: str,
) -> int:
    """1-based rank of the ground-truth image by descending cosine.

    Ties are broken by ascending image id so ranks are deterministic even on
    fixture embeddings where exact ties are common.
    """
    if gt_image_id not in gallery:
        raise ValueError(f"ground-truth image {gt_image_id!r} not in gallery")
    scored = sorted(
        ((-cosine(query_embedding, vec), image_id) for image_id, vec in gallery.items())
    )
    for position, (_, image_id) in enumerate(scored, start=1):
        if image_id == gt_image_id:
            return position
    raise AssertionError("unreachable: gt id checked above")


def mrr(run: Sequence[QueryRank]) -> float:
    if not run:
        raise ValueError("cannot compute MRR of an empty run")
    return sum(1.0 / q.rank for q in run) / len(run)


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    reference_tokens: Sequence[str],
    hypothesis_tokens: Sequence[str],
    max_n: int = 4,
) -> float:
    """Sentence BLEU with clipped counts and epsilon smoothing.

    Uses uniform weights over n = 1..min(max_n, len(hypothesis)); a zero
    clipped-match count is replaced by BLEU_EPSILON rather than zeroing the
    whole score.  Empty hypothesis scores 0.
    """
    hyp_len = len(hypothesis_tokens)
    ref_len = len(reference_tokens)
    if hyp_len == 0:
        return 0.0
    effective_n = min(max_n, hyp_len)
    log_sum = 0.0
    for n in range(1, effective_n + 1):
        hyp_counts = _ngram_counts(hypothesis_tokens, n)
        ref_counts = _ngram_counts(reference_tokens, n)
        matched = sum(
            min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
        )
        total = hyp_len - n + 1
        numerator = matched if matched > 0 else BLEU_EPSILON
        log_sum += math.log(numerator / total)
    score = math.exp(log_sum / effective_n)
    if hyp_len < ref_len:
        score *= math.exp(1.0 - ref_len / hyp_len)
    return min(score, 1.0)


def _align_meteor(
    reference_tokens: Sequence[str], hypothesis_tokens: Sequence[str]
) -> list[tuple[int, int]]:
    """(hyp_index, ref_index) matches: exact stage then stem stage.

    Each stage scans hypothesis tokens left to right and takes the leftmost
    still-unmatched reference token, so the alignment is deterministic.
    """
    matches: list[tuple[int, int]] = []
    hyp_free = [True] * len(hypothesis_tokens)
    ref_free = [True] * len(reference_tokens)

    def run_stage(key) -> None:
        ref_keys = [key(tok) for tok in reference_tokens]
        for i, tok in enumerate(hypothesis_tokens):
            if not hyp_free[i]:
                continue
            wanted = key(tok)
            for j, ref_key in enumerate(ref_keys):
                if ref_free[j] and ref_key == wanted:
                    matches.append((i, j))
                    hyp_free[i] = False
                    ref_free[j] = False
                    break

    run_stage(lambda tok: tok)
    run_stage(stem)
    matches.sort()
    return matches


def _count_chunks(matches: Sequence[tuple[int, int]]) -> int:
    chunks = 0
    prev: tuple[int, int] | None = None
    for hyp_i, ref_j in matches:
        if prev is None or hyp_i != prev[0] + 1 or ref_j != prev[1] + 1:
            chunks += 1
        prev = (hyp_i, ref_j)
    return chunks


def meteor_lite(
    reference_tokens: Sequence[str], hypothesis_tokens: Sequence[str]
) -> float:
    """Harmonic-mean alignment score with a fragmentation penalty.

    Reduced variant: matching uses exact surfaces and Porter stems only (no
    synonym stage), so absolute values are not comparable with toolkit METEOR.
    """
    matches = _align_meteor(reference_tokens, hypothesis_tokens)
    m = len(matches)
    if m == 0:
        return 0.0
    precision = m / len(hypothesis_tokens)
    recall = m / len(reference_tokens)
    f_mean = 10.0 * precision * recall / (recall + 9.0 * precision)
    penalty = 0.5 * (_count_chunks(matches) / m) ** 3
    return f_mean * (1.0 - penalty)


def classification_report(
    gold: Sequence[str], predicted: Sequence[str]
) -> tuple[float, float, float, float]:
    """(accuracy, precision, recall, f1) with support-weighted averaging.

    Per-class precision/recall/f1 are weighted by gold-class support; a class
    never predicted gets precision 0 rather than an error.
    """
    if len(gold) != len(predicted):
        raise ValueError(
            f"label length mismatch: {len(gold)} gold vs {len(predicted)} predicted"
        )
    if not gold:
        raise ValueError("cannot score an empty label list")
    total = len(gold)
    accuracy = sum(1 for g, p in zip(gold, predicted) if g == p) / total
    support = Counter(gold)
    predicted_counts = Counter(predicted)
    true_positive = Counter(g for g, p in zip(gold, predicted) if g == p)
    precision = recall = f1 = 0.0
    for label in sorted(support):
        weight = support[label] / total
        tp = true_positive[label]
        label_precision = tp / predicted_counts[label] if predicted_counts[label] else 0.0
        label_recall = tp / support[label]
        denom = label_precision + label_recall
        label_f1 = 2.0 * label_precision * label_recall / denom if denom else 0.0
        precision += weight * label_precision
        recall += weight * label_recall
        f1 += weight * label_f1
    return accuracy, precision, recall, f1


def count_insertions(
    original_tokens: Sequence[str], augmented_tokens: Sequence[str]
) -> int:
    """Augmented tokens left over after a longest-common-subsequence match."""
    n, m = len(original_tokens), len(augmented_tokens)
    # lcs[j] holds the LCS length of original[:i] vs augmented[:j].
    lcs = [0] * (m + 1)
    for i in range(1, n + 1):
        prev_diag = 0
        for j in range(1, m + 1):
            tmp = lcs[j]
            if original_tokens[i - 1] == augmented_tokens[j - 1]:
                lcs[j] = prev_diag + 1
            elif lcs[j - 1] > lcs[j]:
                lcs[j] = lcs[j - 1]
            prev_diag = tmp
    return m - lcs[m]


def corpus_similarity(pairs: Iterable[tuple[np.ndarray, np.ndarray]]) -> float:
    sims = [cosine(u, v) for u, v in pairs]
    if not sims:
        raise ValueError("cannot average similarities over zero pairs")
    return sum(sims) / len(sims)


def axiom_violation_rate(
    original_run: Sequence[QueryRank], augmented_run: Sequence[QueryRank]
) -> float:
    """Fraction of queries ranked strictly worse after augmentation.

    This scores the evaluated retrieval model's rank stability, not the
    augmenter itself.
    """
    original = {q.query_id: q.rank for q in original_run}
    augmented = {q.query_id: q.rank for q in augmented_run}
    if len(original) != len(original_run) or len(augmented) != len(augmented_run):
        raise ValueError("duplicate query ids in a retrieval run")
    if original.keys() != augmented.keys():
        missing = sorted(original.keys() ^ augmented.keys())
        raise ValueError(f"runs cover different query ids: {missing}")
    if not original:
        raise ValueError("cannot compute a violation rate over zero queries")
    worse = sum(1 for qid, rank in original.items() if augmented[qid] > rank)
    return worse / len(original)


def render_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Plain-text table with aligned columns; floats shown to 4 places."""

    def fmt(value: object) -> str:
        if isinstance(value, float):
            return f"{value:.4f}"
        return "-" if value is None else str(value)

    cells = [[fmt(v) for v in row] for row in rows]
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in cells)) if cells else len(headers[i])
        for i in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for row in cells:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(row))).rstrip())
    return "\n".join(lines) + "\n"
