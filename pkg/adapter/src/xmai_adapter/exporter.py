"""Offline exporters: images in, detection or embedding JSON out.

Output formats match what the pipeline's corpus loaders read:

* detections: ``{image_id: [{"object": str, "attribute": str,
  "confidence": float}, ...]}``
* embeddings: ``{image_id: [float, ...]}``

The image id is the filename stem, so ``images/img07.png`` pairs with
corpus entries whose image_id is ``img07``.  Unreadable files are skipped
with a warning rather than failing the batch.
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path

from PIL import Image, UnidentifiedImageError

log = logging.getLogger("xmai_adapter")

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp"}

# Small named palette for the no-checkpoint detector; nearest RGB wins.
_PALETTE = [
    ("red", (205, 35, 35)),
    ("orange", (235, 140, 30)),
    ("yellow", (230, 220, 50)),
    ("green", (45, 160, 60)),
    ("blue", (40, 80, 200)),
    ("purple", (130, 50, 160)),
    ("brown", (120, 80, 45)),
    ("black", (20, 20, 20)),
    ("white", (240, 240, 240)),
    ("gray", (128, 128, 128)),
]


def label_from_filename(path: Path) -> str:
    """Object label guessed from the stem: its last alphabetic run.

    "red_car.png" -> "car", "img07.png" -> "img".  Purely a stand-in for a
    real detector's class head; it keeps offline fixtures self-describing.
    """
    runs = re.findall(r"[a-zA-Z]+", path.stem)
    return runs[-1].lower() if runs else path.stem.lower()


def dominant_color(image: Image.Image) -> tuple[str, float]:
    """(palette name, fraction of pixels that chose it)."""
    small = image.convert("RGB")
    if small.width > 64 or small.height > 64:
        small = small.resize((64, 64))
    counts = {name: 0 for name, _ in _PALETTE}
    data = small.tobytes()
    pixels = [(data[i], data[i + 1], data[i + 2]) for i in range(0, len(data), 3)]
    for r, g, b in pixels:
        best_name, best_dist = None, None
        for name, (pr, pg, pb) in _PALETTE:
            dist = (r - pr) ** 2 + (g - pg) ** 2 + (b - pb) ** 2
            if best_dist is None or dist < best_dist:
                best_name, best_dist = name, dist
        counts[best_name] += 1
    winner = max(counts, key=lambda name: counts[name])
    return winner, counts[winner] / len(pixels)


class ColorStubDetector:
    """Filename stem for the object, dominant color for its one attribute."""

    def detect(self, path: Path, image: Image.Image) -> list[dict]:
        attribute, coverage = dominant_color(image)
        return [
            {
                "object": label_from_filename(path),
                "attribute": attribute,
                "confidence": round(min(1.0, coverage), 3),
            }
        ]


class CheckpointDetector:
    """Torchvision detection checkpoint; box crops get a color attribute.

    Off-the-shelf detector heads have no attribute vocabulary, so the top
    attribute is taken from the crop's dominant palette color; confidence
    is the detector's box score.
    """

    # COCO class ids as used by torchvision detection models.
    _COCO = {
        1: "person", 2: "bicycle", 3: "car", 4: "motorcycle", 5: "airplane",
        6: "bus", 7: "train", 8: "truck", 9: "boat", 10: "traffic light",
        16: "bird", 17: "cat", 18: "dog", 19: "horse", 20: "sheep",
        21: "cow", 22: "elephant", 23: "bear", 24: "zebra", 25: "giraffe",
        44: "bottle", 47: "cup", 62: "chair", 63: "couch", 64: "potted plant",
        65: "bed", 67: "dining table", 72: "tv", 73: "laptop", 77: "cell phone",
    }

    def __init__(self, checkpoint: str, score_floor: float = 0.5):
        try:
            import torch
            import torchvision
        except ImportError as exc:
            raise RuntimeError(
                "checkpoint detectors need the optional torch/torchvision "
                "dependencies; install the adapter with the [real] extra"
            ) from exc
        self._torch = torch
        self._to_tensor = torchvision.transforms.functional.to_tensor
        self._model = torchvision.models.detection.fasterrcnn_resnet50_fpn(
            weights=None, weights_backbone=None
        )
        state = torch.load(checkpoint, map_location="cpu", weights_only=True)
        self._model.load_state_dict(state)
        self._model.eval()
        self._score_floor = score_floor

    def detect(self, path: Path, image: Image.Image) -> list[dict]:
        rgb = image.convert("RGB")
        with self._torch.no_grad():
            output = self._model([self._to_tensor(rgb)])[0]
        detections = []
        for box, label, score in zip(
            output["boxes"], output["labels"], output["scores"]
        ):
            if float(score) < self._score_floor:
                continue
            name = self._COCO.get(int(label))
            if name is None:
                continue
            left, top, right, bottom = (int(v) for v in box)
            crop = rgb.crop((left, top, max(right, left + 1), max(bottom, top + 1)))
            attribute, _ = dominant_color(crop)
            detections.append(
                {
                    "object": name,
                    "attribute": attribute,
                    "confidence": round(float(score), 3),
                }
            )
        return detections


def _iter_images(image_dir: Path):
    for path in sorted(image_dir.iterdir()):
        if not path.is_file() or path.suffix.lower() not in IMAGE_SUFFIXES:
            continue
        try:
            with Image.open(path) as img:
                img.load()
                yield path, img
        except (UnidentifiedImageError, OSError) as exc:
            log.warning("skipping unreadable image %s: %s", path.name, exc)


def export_detections(image_dir: str, out_path: str, detector=None) -> dict:
    """Detect over every readable image in a directory; write and return the map."""
    detector = detector or ColorStubDetector()
    out: dict[str, list[dict]] = {}
    for path, image in _iter_images(Path(image_dir)):
        out[path.stem] = detector.detect(path, image)
    _write_json(out_path, out)
    return out


def export_embeddings(image_dir: str, out_path: str, encoder) -> dict:
    """Embed every readable image in a directory; write and return the map."""
    out: dict[str, list[float]] = {}
    for path, _ in _iter_images(Path(image_dir)):
        out[path.stem] = [float(x) for x in encoder.image_embed(str(path))]
    _write_json(out_path, out)
    return out


def _write_json(out_path: str, payload: dict) -> None:
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
