"""Command line entry: serve the protocol or export offline files."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import AdapterConfig
from .exporter import (
    CheckpointDetector,
    ColorStubDetector,
    export_detections,
    export_embeddings,
)
from .server import build_models, serve


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xmai-adapter",
        description="Model server and exporters for the xmai augmentation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve_p = sub.add_parser("serve", help="answer protocol requests")
    serve_p.add_argument("--listen", default="stdio", help="stdio or tcp:<port>")
    serve_p.add_argument("--maskfill-model", default="toy")
    serve_p.add_argument("--encoder-model", default="toy")
    serve_p.add_argument("--tagger-model", default="toy")
    serve_p.add_argument("--device", default="cpu")
    serve_p.add_argument("--batch-size", type=int, default=8)

    det_p = sub.add_parser("export-detections", help="images -> detections JSON")
    det_p.add_argument("--images", required=True, help="directory of images")
    det_p.add_argument("--out", required=True, help="output JSON path")
    det_p.add_argument(
        "--detector",
        default="color",
        help='"color" for the built-in stub, else a detection checkpoint path',
    )

    emb_p = sub.add_parser("export-embeddings", help="images -> embeddings JSON")
    emb_p.add_argument("--images", required=True, help="directory of images")
    emb_p.add_argument("--out", required=True, help="output JSON path")
    emb_p.add_argument("--encoder-model", default="toy")
    emb_p.add_argument("--device", default="cpu")
    emb_p.add_argument("--batch-size", type=int, default=8)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("XMAI_ADAPTER_LOG", "WARNING").upper(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            config = AdapterConfig(
                listen=args.listen,
                maskfill_model=args.maskfill_model,
                encoder_model=args.encoder_model,
                tagger_model=args.tagger_model,
                device=args.device,
                batch_size=args.batch_size,
            )
            serve(config)
        elif args.command == "export-detections":
            if args.detector == "color":
                detector = ColorStubDetector()
            else:
                detector = CheckpointDetector(args.detector)
            exported = export_detections(args.images, args.out, detector)
            print(f"wrote {len(exported)} detection records to {args.out}", file=sys.stderr)
        else:
            config = AdapterConfig(
                encoder_model=args.encoder_model,
                device=args.device,
                batch_size=args.batch_size,
            )
            encoder = build_models(config).encoder
            exported = export_embeddings(args.images, args.out, encoder)
            print(f"wrote {len(exported)} embeddings to {args.out}", file=sys.stderr)
    except KeyboardInterrupt:
        return 130
    except (RuntimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
