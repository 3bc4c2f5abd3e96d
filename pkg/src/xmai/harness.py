"""Run orchestration: augmentation over a corpus, evaluation, sweeps.

The functions here take already-constructed providers and parsed inputs and
return plain data (JSON-ready dicts plus text tables); the CLI layer owns
argument parsing and file writing.  Every run is ordered by example id so
output bytes are stable regardless of worker count.
"""

from __future__ import annotations

import itertools
import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, Mapping, Sequence

from .augment import augment_example, result_to_dict
from .baselines import delete_augment, eda_augment
from .core import (
    EMPTY_DETECTIONS,
    AugmentationConfig,
    AugmentationResult,
    DetectionRecord,
    MultimodalExample,
    tokenize,
)
from .metrics import (
    EvalReport,
    QueryRank,
    axiom_violation_rate,
    bleu,
    classification_report,
    corpus_similarity,
    count_insertions,
    meteor_lite,
    mrr,
    rank_gallery,
    render_table,
)
from .providers import ImageEmbeddingMap, ProviderBundle, ProviderError
from .rng import derive_stream

log = logging.getLogger(__name__)

ENTAILMENT_LABELS = ("entailment", "neutral", "contradiction")

# Reference numbers from the method's full-scale MSCOCO / SNLI-VE evaluation.
# They are context for readers of fixture-sized reports, not targets: toy
# corpora cannot reproduce them.
REFERENCE_RETRIEVAL = {
    "scale": "full MSCOCO retrieval run; not reproducible on fixtures",
    "original_mrr": 0.632,
    "augmented_mrr": 0.536,
}
REFERENCE_ENTAILMENT = {
    "scale": "full SNLI-VE entailment run; not reproducible on fixtures",
    "original_accuracy": 0.792,
    "augmented_accuracy": 0.643,
}

# Fraction of per-example provider failures tolerated before the run is
# considered broken.
FAILURE_BUDGET = 0.10

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILURE_BUDGET = 2

SWEEP_PARAMS = ("lambda1", "lambda2", "lambda3", "k", "t")
_CONFIG_FIELD = {
    "lambda1": "lambda1",
    "lambda2": "lambda2",
    "lambda3": "lambda3",
    "k": "k",
    "t": "threshold_t",
}


def _augment_one(
    example: MultimodalExample,
    detections: Mapping[str, DetectionRecord],
    bundle: ProviderBundle,
    config: AugmentationConfig,
    method: str,
    rate: float,
) -> dict:
    if method == "xmai":
        record = detections.get(example.image_id, EMPTY_DETECTIONS)
        return result_to_dict(augment_example(example, record, bundle, config))
    prng = derive_stream(config.seed, example.id)
    stream = tokenize(example.text)
    if method == "deletion":
        out = delete_augment(stream, rate, prng)
    elif method == "eda":
        if bundle.match_table is None:
            raise ProviderError("the eda baseline needs a word-embedding table")
        out = eda_augment(stream, rate, prng, bundle.match_table)
    else:
        raise ValueError(f"unknown augmentation method {method!r}")
    result = AugmentationResult(example.id, example.text, out.text(), (), baseline=method)
    return result_to_dict(result)


def _insertion_count(original: str, augmented: str) -> int:
    return count_insertions(
        tokenize(original).word_lowers(), tokenize(augmented).word_lowers()
    )


def run_augment(
    examples: Sequence[MultimodalExample],
    detections: Mapping[str, DetectionRecord],
    bundle: ProviderBundle,
    config: AugmentationConfig,
    *,
    method: str = "xmai",
    rate: float = 0.1,
    workers: int = 1,
) -> tuple[list[dict], dict, int]:
    """Augment a corpus; returns (output lines, summary, exit code).

    Provider failures are recorded per example and the run continues; more
    than FAILURE_BUDGET of the corpus failing turns the exit code nonzero.
    """
    ordered = sorted(examples, key=lambda ex: ex.id)

    def work(example: MultimodalExample) -> tuple[str, dict | None, str | None]:
        try:
            return example.id, _augment_one(
                example, detections, bundle, config, method, rate
            ), None
        except ProviderError as exc:
            log.warning("example %s failed: %s", example.id, exc)
            return example.id, None, str(exc)

    if workers <= 1:
        outcomes = [work(ex) for ex in ordered]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(work, ordered))

    by_id = {ex.id: ex for ex in ordered}
    lines: list[dict] = []
    insertion_counts: list[int] = []
    failures = modified = 0
    for example_id, payload, error in outcomes:
        if payload is None:
            failures += 1
            lines.append(
                {"id": example_id, "original": by_id[example_id].text, "error": error}
            )
            continue
        lines.append(payload)
        inserted = _insertion_count(payload["original"], payload["augmented"])
        insertion_counts.append(inserted)
        if payload["augmented"] != payload["original"]:
            modified += 1

    summary = {
        "method": method,
        "examples": len(ordered),
        "failures": failures,
        "modified": modified,
        "mean_insertions": statistics.fmean(insertion_counts)
        if insertion_counts
        else 0.0,
        "std_insertions": statistics.pstdev(insertion_counts)
        if insertion_counts
        else 0.0,
    }
    over_budget = ordered and failures / len(ordered) > FAILURE_BUDGET
    return lines, summary, EXIT_FAILURE_BUDGET if over_budget else EXIT_OK


def load_augmented_texts(lines: Sequence[dict]) -> dict[str, str]:
    """id -> augmented text from augment output lines; failed lines skipped."""
    out: dict[str, str] = {}
    for line in lines:
        if "augmented" in line:
            out[line["id"]] = line["augmented"]
    return out


def _build_gallery(
    image_map: ImageEmbeddingMap,
    gt_ids: Sequence[str],
    gallery_size: int | None,
):
    available = image_map.ids()
    missing = sorted(set(gt_ids) - set(available))
    if missing:
        raise ValueError(f"no gallery embedding for image ids: {missing}")
    if gallery_size is None:
        chosen = list(available)
    else:
        distinct_gt = sorted(set(gt_ids))
        if len(distinct_gt) > gallery_size:
            raise ValueError(
                f"--gallery-size {gallery_size} is smaller than the "
                f"{len(distinct_gt)} distinct ground-truth images"
            )
        fill = [i for i in available if i not in set(distinct_gt)]
        chosen = distinct_gt + fill[: gallery_size - len(distinct_gt)]
    return {image_id: image_map.get(image_id) for image_id in chosen}


def run_retrieval_eval(
    examples: Sequence[MultimodalExample],
    augmented_texts: Mapping[str, str],
    text_embedder,
    image_map: ImageEmbeddingMap,
    *,
    gallery_size: int | None = None,
) -> tuple[dict, str]:
    """Rank original and augmented texts against the image gallery.

    Returns a JSON-ready report and an aligned text table.  Every corpus
    example must have an augmented text; missing ids are an error so silent
    partial evaluations cannot happen.
    """
    ordered = sorted(examples, key=lambda ex: ex.id)
    if not ordered:
        raise ValueError("empty corpus")
    missing = sorted(ex.id for ex in ordered if ex.id not in augmented_texts)
    if missing:
        raise ValueError(f"no augmented text for example ids: {missing}")

    gallery = _build_gallery(image_map, [ex.image_id for ex in ordered], gallery_size)
    original_run: list[QueryRank] = []
    augmented_run: list[QueryRank] = []
    tt_pairs = []
    it_pairs = []
    bleu_scores: list[float] = []
    meteor_scores: list[float] = []
    for ex in ordered:
        original_stream = tokenize(ex.text)
        augmented_stream = tokenize(augmented_texts[ex.id])
        original_vec = text_embedder.embed(original_stream)
        augmented_vec = text_embedder.embed(augmented_stream)
        image_vec = image_map.get(ex.image_id)
        original_run.append(
            QueryRank(
                ex.id,
                ex.image_id,
                rank_gallery(original_vec, gallery, ex.image_id),
                len(gallery),
            )
        )
        augmented_run.append(
            QueryRank(
                ex.id,
                ex.image_id,
                rank_gallery(augmented_vec, gallery, ex.image_id),
                len(gallery),
            )
        )
        tt_pairs.append((original_vec, augmented_vec))
        it_pairs.append((image_vec, augmented_vec))
        reference = original_stream.word_lowers()
        hypothesis = augmented_stream.word_lowers()
        bleu_scores.append(bleu(reference, hypothesis))
        meteor_scores.append(meteor_lite(reference, hypothesis))

    original_report = EvalReport(method="original", mrr=mrr(original_run))
    augmented_report = EvalReport(
        method="augmented",
        mrr=mrr(augmented_run),
        sim_tt=corpus_similarity(tt_pairs),
        sim_it=corpus_similarity(it_pairs),
        bleu=statistics.fmean(bleu_scores),
        meteor=statistics.fmean(meteor_scores),
        axiom_violation_rate=axiom_violation_rate(original_run, augmented_run),
    )
    report = {
        "queries": len(ordered),
        "gallery_size": len(gallery),
        "original": original_report.as_dict(),
        "augmented": augmented_report.as_dict(),
        "delta": {"mrr": augmented_report.mrr - original_report.mrr},
        "full_scale_reference": REFERENCE_RETRIEVAL,
    }
    headers = ["Method", "MRR", "Sim_TT", "Sim_IT", "BLEU", "METEOR", "RankViol"]
    rows = [
        [
            r.method,
            r.mrr,
            r.sim_tt,
            r.sim_it,
            r.bleu,
            r.meteor,
            r.axiom_violation_rate,
        ]
        for r in (original_report, augmented_report)
    ]
    return report, render_table(headers, rows)


def load_label_file(path) -> list[str]:
    """One entailment label per line; case-insensitive, blank lines rejected."""
    labels: list[str] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            label = raw.strip().lower()
            if label not in ENTAILMENT_LABELS:
                raise ValueError(
                    f"{path}:{lineno}: {raw.strip()!r} is not one of "
                    f"{'/'.join(ENTAILMENT_LABELS)}"
                )
            labels.append(label)
    return labels


def run_entailment_eval(
    gold: Sequence[str],
    predicted_original: Sequence[str],
    predicted_augmented: Sequence[str],
) -> tuple[dict, str]:
    """Score both prediction sets and the entailment->contradiction flips."""
    if not len(gold) == len(predicted_original) == len(predicted_augmented):
        raise ValueError(
            "label files are not aligned: "
            f"{len(gold)} gold, {len(predicted_original)} original, "
            f"{len(predicted_augmented)} augmented"
        )
    original_report = EvalReport(method="original")
    augmented_report = EvalReport(method="augmented")
    (
        original_report.accuracy,
        original_report.precision,
        original_report.recall,
        original_report.f1,
    ) = classification_report(gold, predicted_original)
    (
        augmented_report.accuracy,
        augmented_report.precision,
        augmented_report.recall,
        augmented_report.f1,
    ) = classification_report(gold, predicted_augmented)

    entailed = [i for i, g in enumerate(gold) if g == "entailment"]
    flips = sum(
        1
        for i in entailed
        if predicted_original[i] == "entailment"
        and predicted_augmented[i] == "contradiction"
    )
    flip_rate = flips / len(entailed) if entailed else 0.0

    report = {
        "examples": len(gold),
        "original": original_report.as_dict(),
        "augmented": augmented_report.as_dict(),
        "delta": {
            "accuracy": augmented_report.accuracy - original_report.accuracy,
            "precision": augmented_report.precision - original_report.precision,
            "recall": augmented_report.recall - original_report.recall,
            "f1": augmented_report.f1 - original_report.f1,
        },
        "entailment_to_contradiction_flip_rate": flip_rate,
        "full_scale_reference": REFERENCE_ENTAILMENT,
    }
    headers = ["Method", "Acc", "Precision", "Recall", "F1"]
    rows = [
        [r.method, r.accuracy, r.precision, r.recall, r.f1]
        for r in (original_report, augmented_report)
    ]
    return report, render_table(headers, rows)


def _fallback_site_count(lines: Sequence[dict]) -> int:
    return sum(
        1
        for line in lines
        for decision in line.get("decisions", ())
        if decision["match_kind"] == "noun_fallback"
    )


def parse_grid_axis(text: str) -> tuple[str, list[float]]:
    """Parse one `name=v1,v2,...` sweep axis."""
    name, _, values = text.partition("=")
    name = name.strip()
    if name not in SWEEP_PARAMS:
        raise ValueError(
            f"unknown sweep parameter {name!r}; choose from {', '.join(SWEEP_PARAMS)}"
        )
    if not values.strip():
        raise ValueError(f"sweep axis {text!r} has no values")
    parsed = []
    for chunk in values.split(","):
        parsed.append(float(chunk.strip()))
    return name, parsed


def run_sweep(
    examples: Sequence[MultimodalExample],
    detections: Mapping[str, DetectionRecord],
    bundle: ProviderBundle,
    base_config: AugmentationConfig,
    grid: Mapping[str, Sequence[float]],
    *,
    workers: int = 1,
    eval_hook: Callable[[list[dict]], dict] | None = None,
) -> tuple[list[dict], str]:
    """One augmentation run per grid point, reported in long format.

    `grid` maps parameter names (lambda1/2/3, k, t) to value lists; points
    are the Cartesian product, run sequentially.  `eval_hook` may add extra
    metrics computed from each point's output lines.  Failed points are
    recorded and the sweep continues.
    """
    if not grid:
        raise ValueError("empty sweep grid")
    axes = sorted(grid)
    rows: list[dict] = []
    for values in itertools.product(*(grid[a] for a in axes)):
        point = dict(zip(axes, values))
        overrides = {
            _CONFIG_FIELD[name]: int(v) if name == "k" else v
            for name, v in point.items()
        }
        config = replace(base_config, **overrides)
        coords = {name: point.get(name) for name in SWEEP_PARAMS}
        started = time.perf_counter()
        try:
            lines, summary, _ = run_augment(
                examples, detections, bundle, config, workers=workers
            )
        except Exception as exc:  # a bad point must not kill the sweep
            log.warning("sweep point %s failed: %s", point, exc)
            rows.append({**coords, "metric": "error", "value": str(exc)})
            continue
        elapsed = time.perf_counter() - started
        per_example = elapsed / len(examples) if examples else 0.0
        metrics_out = {
            "mean_insertions": summary["mean_insertions"],
            "std_insertions": summary["std_insertions"],
            "modified": float(summary["modified"]),
            "failures": float(summary["failures"]),
            "fallback_sites": float(_fallback_site_count(lines)),
            "seconds_per_example": per_example,
        }
        if eval_hook is not None:
            metrics_out.update(eval_hook(lines))
        for metric, value in metrics_out.items():
            rows.append({**coords, "metric": metric, "value": value})

    headers = [*SWEEP_PARAMS, "metric", "value"]
    table_rows = [[row[h] for h in SWEEP_PARAMS] + [row["metric"], row["value"]] for row in rows]
    return rows, render_table(headers, table_rows)
