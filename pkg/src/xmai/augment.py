"""Attribute insertion: mask placement, candidate scoring, and final selection.

For one image-text pair, the engine masks object mentions, asks a mask-fill
provider for candidate words, scores each candidate by combining fill
probability (p), similarity to the object's detected visual attribute (s),
and cross-modal dissimilarity between the candidate sentence and the image
(d), then splices in the argmax of ``lambda1*p + lambda2*s + lambda3*d``.
Masks are processed left to right so each fill sees earlier insertions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .core import (
    WORD,
    AugmentationConfig,
    AugmentationResult,
    CandidateInsertion,
    DetectionRecord,
    MaskDecision,
    MaskSite,
    MultimodalExample,
    NEIGHBORHOOD_RADIUS,
    TokenStream,
    tokenize,
)
from .providers import ProviderBundle, WordEmbeddingTable, cosine
from .stopwords import STOPWORDS

log = logging.getLogger(__name__)

SENTENCE_FINAL = {".", "!", "?"}


@dataclass(frozen=True)
class MaskPlan:
    stream: TokenStream
    sites: tuple[MaskSite, ...]
    fallback_used: bool


def _label_words(label: str) -> list[str]:
    return [t.lower for t in tokenize(label).tokens if t.kind == WORD]


def _direct_sites(stream: TokenStream, detections: DetectionRecord) -> list[MaskSite]:
    """One site before the first token of every occurrence of every object label."""
    sites: dict[int, MaskSite] = {}
    tokens = stream.tokens
    for det in detections.detections:
        words = _label_words(det.object_label)
        if not words:
            continue
        span = len(words)
        for start in range(len(tokens) - span + 1):
            window = tokens[start : start + span]
            if all(t.kind == WORD for t in window) and [t.lower for t in window] == words:
                # Earliest detection in the record keeps a contested index.
                if start not in sites:
                    sites[start] = MaskSite(
                        insert_before_index=start,
                        object_label=det.object_label,
                        attribute_phrase=det.attribute_phrase,
                        match_kind="direct",
                        match_similarity=1.0,
                    )
    return [sites[i] for i in sorted(sites)]


def _fallback_sites(
    stream: TokenStream,
    tags: list[str],
    detections: DetectionRecord,
    match_table: WordEmbeddingTable,
    threshold: float,
) -> list[MaskSite]:
    """Bind nouns to detections whose label embedding clears the threshold."""
    label_vectors = []
    for det in detections.detections:
        vec = match_table.phrase_vector(_label_words(det.object_label))
        if vec is not None:
            label_vectors.append((det, vec))
    if not label_vectors:
        return []
    sites = []
    for index, token in enumerate(stream.tokens):
        if token.kind != WORD or tags[index] != "noun":
            continue
        noun_vec = match_table.lookup(token.lower)
        if noun_vec is None:
            continue  # OOV nouns cannot be matched
        best_det, best_sim = None, -math.inf
        for det, vec in label_vectors:
            sim = cosine(noun_vec, vec)
            if sim > best_sim:  # strict: earliest detection wins ties
                best_det, best_sim = det, sim
        if best_det is not None and best_sim >= threshold:
            sites.append(
                MaskSite(
                    insert_before_index=index,
                    object_label=best_det.object_label,
                    attribute_phrase=best_det.attribute_phrase,
                    match_kind="noun_fallback",
                    match_similarity=max(0.0, min(1.0, best_sim)),
                )
            )
    return sites


def find_mask_sites(
    stream: TokenStream,
    tags: list[str],
    detections: DetectionRecord,
    match_table: WordEmbeddingTable,
    threshold: float,
) -> MaskPlan:
    """Plan insertion points: direct label matches, else the noun fallback.

    The fallback runs only when no object label occurs verbatim anywhere in
    the text; it compares noun embeddings against label embeddings and keeps
    those at or above ``threshold``.
    """
    sites = _direct_sites(stream, detections)
    if not sites:
        sites = _fallback_sites(stream, tags, detections, match_table, threshold)
    return MaskPlan(
        stream=stream,
        sites=tuple(sites),
        fallback_used=any(s.match_kind == "noun_fallback" for s in sites),
    )


def filter_candidates(
    raw: list[tuple[str, float]],
    stream: TokenStream,
    mask_index: int,
    stopwords: frozenset[str] = STOPWORDS,
) -> list[tuple[str, float]]:
    """Drop stopwords and words already present within three tokens of the mask.

    The mask sits before token ``mask_index``, so the guarded window spans
    token indices ``mask_index - 3`` through ``mask_index + 2``.
    """
    lo = max(0, mask_index - NEIGHBORHOOD_RADIUS)
    hi = min(len(stream.tokens), mask_index + NEIGHBORHOOD_RADIUS)
    nearby = {t.lower for t in stream.tokens[lo:hi]}
    kept = []
    for word, prob in raw:
        lower = word.lower()
        if lower in stopwords or lower in nearby:
            continue
        kept.append((word, prob))
    return kept


def normalize(values: list[float]) -> list[float]:
    """Scale nonnegative values to sum to one; zero-sum input becomes uniform."""
    if not values:
        return []
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite component {v}")
        if v < 0:
            raise ValueError(f"negative component {v}")
    total = sum(values)
    if total == 0.0:
        return [1.0 / len(values)] * len(values)
    return [v / total for v in values]


def attribute_similarity(
    table: WordEmbeddingTable, candidate_word: str, attribute_phrase: str
) -> float | None:
    """Cosine between a candidate and the attribute phrase's mean vector.

    Clamped to [0, 1].  Returns None when the candidate is out of vocabulary
    or the phrase has no in-vocabulary words; the caller then falls back to a
    uniform similarity component for the whole mask.
    """
    candidate_vec = table.lookup(candidate_word)
    if candidate_vec is None:
        return None
    phrase_words = _label_words(attribute_phrase)
    phrase_vec = table.phrase_vector(phrase_words)
    if phrase_vec is None:
        return None
    return max(0.0, min(1.0, cosine(candidate_vec, phrase_vec)))


def cross_modal_distance(text_embedder, stream: TokenStream, image_embedding) -> float:
    """1 - cosine between the candidate sentence and the paired image, in [0, 2]."""
    text_vec = text_embedder.embed(stream)
    return 1.0 - cosine(text_vec, image_embedding)


def select_insertion(
    p: list[float],
    s: list[float],
    d: list[float],
    lambda1: float,
    lambda2: float,
    lambda3: float,
) -> tuple[int | None, list[float]]:
    """Combine the components and return (argmax index, scores).

    Scores are ``lambda1*p + lambda2*s + lambda3*d`` per candidate; ties go
    to the lowest index, i.e. the highest raw fill probability.  An empty
    candidate set yields (None, []).
    """
    scores = [lambda1 * pi + lambda2 * si + lambda3 * di for pi, si, di in zip(p, s, d)]
    if not scores:
        return None, []
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best, scores


def _insertion_surface(word: str, stream: TokenStream, index: int) -> str:
    """Lowercase insertions, capitalized when they open a sentence."""
    lower = word.lower()
    at_sentence_start = index == 0 or (
        stream.tokens[index - 1].kind != WORD
        and stream.tokens[index - 1].surface in SENTENCE_FINAL
    )
    if at_sentence_start and lower:
        return lower[0].upper() + lower[1:]
    return lower


def augment_example(
    example: MultimodalExample,
    detections: DetectionRecord,
    bundle: ProviderBundle,
    config: AugmentationConfig,
) -> AugmentationResult:
    """Run the full insertion pipeline for one image-text pair.

    Mask sites are processed in text order on the *current* token stream, so
    every mask-fill query sees previously accepted insertions.  Sites whose
    candidate set empties out are dropped and recorded with a reason.
    """
    stream = tokenize(example.text)
    tags = bundle.pos_tagger.tag(stream)
    plan = find_mask_sites(stream, tags, detections, bundle.match_table, config.threshold_t)

    image_vec = None
    if plan.sites:
        image_vec = bundle.image_embeddings.get(example.image_id)

    current = stream
    offset = 0
    decisions: list[MaskDecision] = []
    for site in plan.sites:
        index = site.insert_before_index + offset
        surfaces = [t.surface for t in current.tokens]
        raw = bundle.mask_fill.fill(surfaces, index, config.k)[: config.k]
        if not raw:
            decisions.append(MaskDecision(site, None, (), "no candidates from provider"))
            continue
        survivors = filter_candidates(raw, current, index)
        if not survivors:
            decisions.append(MaskDecision(site, None, (), "all candidates filtered"))
            continue

        words = [w for w, _ in survivors]
        p = normalize([prob for _, prob in survivors])

        raw_sims = [
            attribute_similarity(bundle.attr_table, w, site.attribute_phrase) for w in words
        ]
        if any(sim is None for sim in raw_sims):
            s = [1.0 / len(words)] * len(words)
        else:
            s = normalize(raw_sims)

        distances = [
            cross_modal_distance(bundle.text_embedder, current.insert_word(index, w), image_vec)
            for w in words
        ]
        d = normalize(distances)

        chosen_index, scores = select_insertion(
            p, s, d, config.lambda1, config.lambda2, config.lambda3
        )
        candidates = [
            CandidateInsertion(word=w, p=pi, s=si, d=di, score=sc)
            for w, pi, si, di, sc in zip(words, p, s, d, scores)
        ]
        chosen = candidates[chosen_index]
        rejected = tuple(c for i, c in enumerate(candidates) if i != chosen_index)
        current = current.insert_word(index, _insertion_surface(chosen.word, current, index))
        offset += 1
        decisions.append(MaskDecision(site, chosen, rejected, None, chosen_index))

    return AugmentationResult(
        example_id=example.id,
        original_text=example.text,
        augmented_text=current.text(),
        decisions=tuple(decisions),
    )


def result_to_dict(result: AugmentationResult) -> dict:
    """JSON-lines form of one augmentation, decision trace included."""
    decisions = []
    for dec in result.decisions:
        all_candidates = list(dec.rejected)
        if dec.chosen is not None:
            all_candidates.insert(dec.chosen_index, dec.chosen)
        decisions.append(
            {
                "index": dec.site.insert_before_index,
                "object": dec.site.object_label,
                "attribute": dec.site.attribute_phrase,
                "match_kind": dec.site.match_kind,
                "match_similarity": dec.site.match_similarity,
                "chosen": dec.chosen.word if dec.chosen else None,
                "candidates": [
                    {"word": c.word, "p": c.p, "s": c.s, "d": c.d, "score": c.score}
                    for c in all_candidates
                ],
                "drop_reason": dec.dropped_reason,
            }
        )
    out = {
        "id": result.example_id,
        "original": result.original_text,
        "augmented": result.augmented_text,
        "decisions": decisions,
    }
    if result.baseline is not None:
        out["baseline"] = result.baseline
    return out
