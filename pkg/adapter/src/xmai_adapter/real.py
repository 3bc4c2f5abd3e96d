"""Pretrained-model backends, loaded lazily and entirely optional.

Importing this module is cheap; the heavy libraries are pulled in only
when a backend is instantiated with a real checkpoint name.  Every class
here matches the call signature of its toy counterpart in ``toys``.
"""

from __future__ import annotations


def _require(module_name: str, extra: str):
    try:
        return __import__(module_name)
    except ImportError as exc:
        raise RuntimeError(
            f"backend needs the optional {module_name!r} dependency; "
            f"install the adapter with the [{extra}] extra"
        ) from exc


class RealMaskFill:
    """Masked-language-model fill via a transformers checkpoint.

    Over-fetches predictions so that, after the server drops wordpiece
    continuations, k whole-word candidates usually remain.
    """

    def __init__(self, model_name: str, device: str = "cpu"):
        transformers = _require("transformers", "real")
        self._pipe = transformers.pipeline(
            "fill-mask", model=model_name, device=device
        )
        self._mask_token = self._pipe.tokenizer.mask_token

    def fill(self, tokens: list[str], mask_index: int, k: int) -> list[tuple[str, float]]:
        words = list(tokens)
        words.insert(mask_index, self._mask_token)
        predictions = self._pipe(" ".join(words), top_k=max(4 * k, 20))
        return [(p["token_str"].strip(), float(p["score"])) for p in predictions]


class RealEncoder:
    """Shared text/image embedding space via a sentence-transformers model.

    Meant for CLIP-family checkpoints (e.g. "clip-ViT-B-32") that encode
    both captions and PIL images into one space.
    """

    def __init__(self, model_name: str, device: str = "cpu", batch_size: int = 8):
        sentence_transformers = _require("sentence_transformers", "real")
        self._model = sentence_transformers.SentenceTransformer(model_name, device=device)
        self._batch_size = batch_size

    def text_embed(self, text: str) -> list[float]:
        vector = self._model.encode([text], batch_size=self._batch_size)[0]
        return [float(x) for x in vector]

    def image_embed(self, path: str) -> list[float]:
        from PIL import Image

        with Image.open(path) as img:
            vector = self._model.encode([img.convert("RGB")], batch_size=self._batch_size)[0]
        return [float(x) for x in vector]


class RealPosTagger:
    """Token-classification checkpoint mapped down to noun / other."""

    _NOUN_PREFIXES = ("NOUN", "PROPN", "NN")

    def __init__(self, model_name: str, device: str = "cpu"):
        transformers = _require("transformers", "real")
        self._pipe = transformers.pipeline(
            "token-classification", model=model_name, device=device
        )

    def tag(self, tokens: list[str]) -> list[str]:
        tags = ["other"] * len(tokens)
        # Tag each token in sentence context, then align by character span.
        text = " ".join(tokens)
        starts = []
        position = 0
        for token in tokens:
            starts.append(position)
            position += len(token) + 1
        for entity in self._pipe(text):
            label = str(entity.get("entity", "")).upper()
            if not label.startswith(self._NOUN_PREFIXES):
                continue
            for i, start in enumerate(starts):
                if start <= entity["start"] < start + len(tokens[i]):
                    tags[i] = "noun"
                    break
        return tags
