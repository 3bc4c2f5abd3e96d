"""Command-line entry point.

Verbs: augment, baseline, eval-retrieval, eval-entailment, sweep.  Provider
flags accept ``fixture:<path>`` for file-backed providers or
``remote:<uri>`` for a line-protocol model server (``stdio:<command>`` or
``tcp:host:port``).  The XMAI_LOG environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .core import AugmentationConfig, load_corpus, load_detections, validate_config
from .harness import (
    EXIT_ERROR,
    EXIT_OK,
    load_augmented_texts,
    load_label_file,
    parse_grid_axis,
    run_augment,
    run_entailment_eval,
    run_retrieval_eval,
    run_sweep,
)
from .providers import (
    FixtureMaskFill,
    FixturePosTagger,
    FixtureTextEmbedder,
    ImageEmbeddingMap,
    ProviderBundle,
    ProviderError,
    WordEmbeddingTable,
)
from .remote import RemoteEndpoint, RemoteMaskFill, RemotePosTagger, RemoteTextEmbedder

log = logging.getLogger(__name__)


class _AllOtherTagger:
    """Stand-in when no --pos source is given: disables noun fallback."""

    def tag(self, stream) -> list[str]:
        return ["other"] * len(stream.tokens)


def _split_spec(value: str, flag: str) -> tuple[str, str]:
    scheme, _, rest = value.partition(":")
    if scheme not in ("fixture", "remote") or not rest:
        raise ValueError(
            f"{flag} must look like fixture:<path> or remote:<uri>, got {value!r}"
        )
    return scheme, rest


class ProviderBuilder:
    """Constructs providers from CLI flags, sharing remote endpoints by URI."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self._endpoints: dict[str, RemoteEndpoint] = {}
        self._word_table: WordEmbeddingTable | None = None

    def close(self) -> None:
        for endpoint in self._endpoints.values():
            endpoint.close()

    def _endpoint(self, uri: str) -> RemoteEndpoint:
        if uri not in self._endpoints:
            self._endpoints[uri] = RemoteEndpoint(uri)
        return self._endpoints[uri]

    def word_table(self) -> WordEmbeddingTable:
        if self._word_table is None:
            path = getattr(self.args, "word_embeddings", None)
            if path is None:
                raise ValueError("this command needs --word-embeddings")
            self._word_table = WordEmbeddingTable.load(path)
        return self._word_table

    def _side_table(self, flag_value: str | None) -> WordEmbeddingTable:
        if flag_value is None:
            return self.word_table()
        return WordEmbeddingTable.load(flag_value)

    def mask_fill(self):
        spec = getattr(self.args, "maskfill", None)
        if spec is None:
            raise ValueError("this command needs --maskfill")
        scheme, rest = _split_spec(spec, "--maskfill")
        if scheme == "fixture":
            return FixtureMaskFill.load(rest)
        return RemoteMaskFill(self._endpoint(rest))

    def pos_tagger(self):
        spec = getattr(self.args, "pos", None)
        if spec is None:
            log.warning(
                "no --pos source; tagging everything non-noun, so the "
                "embedding fallback for unmatched objects is disabled"
            )
            return _AllOtherTagger()
        scheme, rest = _split_spec(spec, "--pos")
        if scheme == "fixture":
            return FixturePosTagger.load(rest)
        return RemotePosTagger(self._endpoint(rest))

    def text_embedder(self):
        spec = getattr(self.args, "text_embed", "fixture")
        if spec == "fixture":
            return FixtureTextEmbedder(self.word_table())
        scheme, rest = _split_spec(spec, "--text-embed")
        if scheme == "fixture":
            return FixtureTextEmbedder(self.word_table())
        return RemoteTextEmbedder(self._endpoint(rest))

    def image_map(self) -> ImageEmbeddingMap:
        path = getattr(self.args, "image_embeddings", None)
        if path is None:
            raise ValueError("this command needs --image-embeddings")
        return ImageEmbeddingMap.load(path)

    def bundle(self) -> ProviderBundle:
        return ProviderBundle(
            mask_fill=self.mask_fill(),
            text_embedder=self.text_embedder(),
            pos_tagger=self.pos_tagger(),
            image_embeddings=self.image_map(),
            match_table=self._side_table(getattr(self.args, "match_embeddings", None)),
            attr_table=self._side_table(getattr(self.args, "attr_embeddings", None)),
        )


def _config_from(args: argparse.Namespace) -> AugmentationConfig:
    return validate_config(
        AugmentationConfig(
            lambda1=args.lambda1,
            lambda2=args.lambda2,
            lambda3=args.lambda3,
            k=args.k,
            threshold_t=args.threshold,
            seed=args.seed,
        )
    )


def _dump_json(payload) -> str:
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def _write_lines(lines: list[dict], out_path: str | None) -> None:
    text = "".join(_dump_json(line) + "\n" for line in lines)
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_summary(summary: dict, args: argparse.Namespace) -> None:
    rendered = json.dumps(summary, ensure_ascii=False, indent=2) + "\n"
    summary_path = getattr(args, "summary", None)
    if summary_path is not None:
        with open(summary_path, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    elif args.out is not None:
        sys.stdout.write(rendered)
    else:
        sys.stderr.write(rendered)


def _emit_report(report: dict, table: str, out_path: str | None) -> None:
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report, ensure_ascii=False, indent=2) + "\n")
        sys.stdout.write(table)
    else:
        sys.stdout.write(json.dumps(report, ensure_ascii=False, indent=2) + "\n")
        sys.stdout.write(table)


def cmd_augment(args: argparse.Namespace) -> int:
    examples = load_corpus(args.corpus)
    detections = load_detections(args.detections) if args.detections else {}
    config = _config_from(args)
    builder = ProviderBuilder(args)
    try:
        bundle = builder.bundle()
        lines, summary, code = run_augment(
            examples, detections, bundle, config, workers=args.workers
        )
    finally:
        builder.close()
    _write_lines(lines, args.out)
    _emit_summary(summary, args)
    return code


def cmd_baseline(args: argparse.Namespace) -> int:
    examples = load_corpus(args.corpus)
    config = validate_config(AugmentationConfig(seed=args.seed))
    rate = args.rate
    if rate is None:
        # Unstated upstream; 0.1 for deletion is a guess, 0.2 matches the
        # usual EDA setting.
        rate = 0.1 if args.method == "deletion" else 0.2
    builder = ProviderBuilder(args)
    try:
        table = builder.word_table() if args.method == "eda" else None
        bundle = ProviderBundle(None, None, None, None, table, None)
        lines, summary, code = run_augment(
            examples,
            {},
            bundle,
            config,
            method=args.method,
            rate=rate,
            workers=args.workers,
        )
    finally:
        builder.close()
    _write_lines(lines, args.out)
    _emit_summary(summary, args)
    return code


def _load_jsonl(path: str) -> list[dict]:
    lines = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                lines.append(json.loads(raw))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
    return lines


def cmd_eval_retrieval(args: argparse.Namespace) -> int:
    examples = load_corpus(args.corpus)
    augmented = load_augmented_texts(_load_jsonl(args.augmented))
    builder = ProviderBuilder(args)
    try:
        report, table = run_retrieval_eval(
            examples,
            augmented,
            builder.text_embedder(),
            builder.image_map(),
            gallery_size=args.gallery_size,
        )
    finally:
        builder.close()
    _emit_report(report, table, args.out)
    return EXIT_OK


def cmd_eval_entailment(args: argparse.Namespace) -> int:
    report, table = run_entailment_eval(
        load_label_file(args.gold),
        load_label_file(args.pred_original),
        load_label_file(args.pred_augmented),
    )
    _emit_report(report, table, args.out)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    examples = load_corpus(args.corpus)
    detections = load_detections(args.detections) if args.detections else {}
    config = _config_from(args)
    grid: dict[str, list[float]] = {}
    for axis in args.grid:
        name, values = parse_grid_axis(axis)
        grid[name] = values
    builder = ProviderBuilder(args)
    try:
        bundle = builder.bundle()

        def eval_hook(lines: list[dict]) -> dict:
            report, _ = run_retrieval_eval(
                examples,
                load_augmented_texts(lines),
                bundle.text_embedder,
                bundle.image_embeddings,
                gallery_size=args.gallery_size,
            )
            return {
                "mrr_original": report["original"]["mrr"],
                "mrr_augmented": report["augmented"]["mrr"],
                "rank_violation_rate": report["augmented"]["axiom_violation_rate"],
            }

        rows, table = run_sweep(
            examples,
            detections,
            bundle,
            config,
            grid,
            workers=args.workers,
            eval_hook=eval_hook if args.eval else None,
        )
    finally:
        builder.close()
    _write_lines(rows, args.out)
    sys.stdout.write(table)
    return EXIT_OK


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--word-embeddings", help="GloVe-style text embedding table")
    parser.add_argument(
        "--match-embeddings",
        help="embedding table for object matching (defaults to --word-embeddings)",
    )
    parser.add_argument(
        "--attr-embeddings",
        help="embedding table for attribute similarity (defaults to --word-embeddings)",
    )
    parser.add_argument("--image-embeddings", help="JSON map image_id -> vector")
    parser.add_argument("--maskfill", help="fixture:<path> or remote:<uri>")
    parser.add_argument("--pos", help="fixture:<path> or remote:<uri>")
    parser.add_argument(
        "--text-embed",
        default="fixture",
        help="'fixture' (mean word vectors) or remote:<uri>",
    )


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda1", type=float, default=1.0)
    parser.add_argument("--lambda2", type=float, default=5.0)
    parser.add_argument("--lambda3", type=float, default=5.0)
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--threshold", type=float, default=0.7)
    parser.add_argument("--seed", type=int, default=0)


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xmai",
        description="Cross-modal attribute insertion and its evaluation harness.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("augment", help="insert attributes into a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--detections")
    p.add_argument("--summary", help="write the run summary JSON here")
    _add_provider_flags(p)
    _add_config_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("baseline", help="run a text-only baseline augmenter")
    p.add_argument("--corpus", required=True)
    p.add_argument("--method", required=True, choices=("deletion", "eda"))
    p.add_argument("--rate", type=float, help="deletion rate / EDA alpha")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--summary")
    p.add_argument("--word-embeddings", help="synonym source for EDA")
    _add_run_flags(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval-retrieval", help="rank texts against the image gallery")
    p.add_argument("--corpus", required=True)
    p.add_argument("--augmented", required=True, help="JSONL from the augment verb")
    p.add_argument("--gallery-size", type=int)
    _add_provider_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_retrieval)

    p = sub.add_parser("eval-entailment", help="score entailment predictions")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred-original", required=True)
    p.add_argument("--pred-augmented", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_entailment)

    p = sub.add_parser("sweep", help="grid of augmentation runs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--detections")
    p.add_argument(
        "--grid",
        action="append",
        required=True,
        help="axis like k=3,5,10; repeat for more axes",
    )
    p.add_argument("--gallery-size", type=int)
    p.add_argument(
        "--eval",
        action="store_true",
        help="run retrieval evaluation at every grid point",
    )
    _add_provider_flags(p)
    _add_config_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def _setup_logging() -> None:
    level_name = os.environ.get("XMAI_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ProviderError, ValueError, OSError) as exc:
        log.error("%s", exc)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
