"""Full-loop check: the augmentation CLI consuming this adapter.

Talks to the sibling xmai package strictly through its public surfaces
(the installed command line and its documented file formats), with every
provider the adapter can serve wired over remote stdio URIs.  Skipped when
xmai is not installed in the environment.
"""

from __future__ import annotations

import importlib.util
import json
import subprocess
import sys

import pytest
from PIL import Image

needs_xmai = pytest.mark.skipif(
    importlib.util.find_spec("xmai") is None,
    reason="the xmai package is not installed",
)

SERVE_URI = f"remote:stdio:{sys.executable} -m xmai_adapter.cli serve"


def _stage_inputs(tmp_path):
    """Images, corpus, and embedding table for a two-example run."""
    images = tmp_path / "images"
    images.mkdir()
    Image.new("RGB", (24, 24), (210, 30, 30)).save(images / "car.png")
    Image.new("RGB", (24, 24), (120, 80, 45)).save(images / "dog.png")

    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text(
        json.dumps({"id": "t01", "text": "a driver posing with a car", "image_id": "car"})
        + "\n"
        + json.dumps({"id": "t02", "text": "a dog in a park", "image_id": "dog"})
        + "\n"
    )

    words = tmp_path / "word_embeddings.txt"
    words.write_text(
        "red 0.9 0.1 0.0 0.0\n"
        "brown 0.1 0.9 0.0 0.0\n"
        "heavy 0.4 0.4 0.2 0.0\n"
        "pale 0.5 0.2 0.3 0.0\n"
        "worn 0.3 0.3 0.4 0.0\n"
    )

    detections = tmp_path / "detections.json"
    embeddings = tmp_path / "image_embeddings.json"
    for argv in (
        ["export-detections", "--images", str(images), "--out", str(detections)],
        ["export-embeddings", "--images", str(images), "--out", str(embeddings)],
    ):
        done = subprocess.run(
            [sys.executable, "-m", "xmai_adapter.cli", *argv],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert done.returncode == 0, done.stderr
    return corpus, detections, words, embeddings


def _augment(tmp_path, corpus, detections, words, embeddings, out_name):
    out = tmp_path / out_name
    done = subprocess.run(
        [
            sys.executable, "-m", "xmai.cli", "augment",
            "--corpus", str(corpus),
            "--detections", str(detections),
            "--word-embeddings", str(words),
            "--image-embeddings", str(embeddings),
            "--maskfill", SERVE_URI,
            "--pos", SERVE_URI,
            "--text-embed", SERVE_URI,
            "--out", str(out),
        ],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert done.returncode == 0, done.stderr
    return out


@needs_xmai
def test_pipeline_augments_over_adapter_providers(tmp_path):
    corpus, detections, words, embeddings = _stage_inputs(tmp_path)
    out = _augment(tmp_path, corpus, detections, words, embeddings, "run1.jsonl")

    lines = {
        line["id"]: line
        for line in map(json.loads, out.read_text().splitlines())
    }
    assert sorted(lines) == ["t01", "t02"]
    first = lines["t01"]
    assert first["original"] == "a driver posing with a car"
    assert first["augmented"] != first["original"]
    # Inserted words come from the adapter's mask-fill and are whole words.
    original_words = first["original"].split()
    augmented_words = first["augmented"].split()
    assert len(augmented_words) > len(original_words)
    assert all("##" not in word for word in augmented_words)
    # The original caption survives, in order, inside the augmented one.
    iterator = iter(augmented_words)
    assert all(word in iterator for word in original_words)

    rerun = _augment(tmp_path, corpus, detections, words, embeddings, "run2.jsonl")
    assert rerun.read_bytes() == out.read_bytes()


@needs_xmai
def test_retrieval_eval_over_adapter_embeddings(tmp_path):
    corpus, detections, words, embeddings = _stage_inputs(tmp_path)
    out = _augment(tmp_path, corpus, detections, words, embeddings, "run.jsonl")
    done = subprocess.run(
        [
            sys.executable, "-m", "xmai.cli", "eval-retrieval",
            "--corpus", str(corpus),
            "--augmented", str(out),
            "--image-embeddings", str(embeddings),
            "--text-embed", SERVE_URI,
        ],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert done.returncode == 0, done.stderr
    assert "MRR" in done.stdout
