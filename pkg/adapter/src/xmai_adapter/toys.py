"""Deterministic stand-in backends, no model downloads required.

These exist so the serving path, the protocol, and downstream pipelines can
be exercised end to end on any machine.  Outputs are stable functions of the
inputs (hashing, pixel statistics, suffix rules); they make no claim to
linguistic or visual quality.
"""

from __future__ import annotations

from PIL import Image

TOY_DIM = 32

# Raw pool the toy language model "predicts" from.  Deliberately includes
# wordpiece continuations so the server's whole-word filter has real work.
_PREDICTIONS = [
    "red", "small", "wooden", "bright", "old", "##ish", "shiny", "blue",
    "tall", "##ing", "quiet", "round", "green", "young", "##ed", "dark",
    "striped", "heavy", "pale", "worn", "##ly", "calm", "broad", "soft",
]
_RAW_POOL = 12  # candidates generated per query before filtering

# Closed-class words the toy tagger never calls nouns.
_FUNCTION_WORDS = frozenset(
    """a an the and or but if of in on at to for with from by as is are was
    were be been being am do does did has have had not no nor so yet this
    that these those it its he she they them his her their i you we me my
    your our us than then there here when where who whom which what why how
    all any both each few more most other some such only own same very can
    will just should now""".split()
)
_VERBISH_SUFFIXES = ("ing", "ed", "ly")


def _fnv1a(text: str) -> int:
    value = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        value = ((value ^ byte) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return value


class ToyMaskFill:
    """Hash-rotated candidate lists keyed on the token after the mask.

    The raw pool size is fixed and independent of k, so a query's candidate
    list at a smaller k is always a prefix of the same query at a larger k.
    """

    def fill(self, tokens: list[str], mask_index: int, k: int) -> list[tuple[str, float]]:
        anchor = tokens[mask_index].lower()
        start = _fnv1a(anchor) % len(_PREDICTIONS)
        out = []
        prob = 0.32
        for i in range(_RAW_POOL):
            out.append((_PREDICTIONS[(start + i) % len(_PREDICTIONS)], round(prob, 6)))
            prob *= 0.72
        return out


class ToyEncoder:
    """Character-trigram hashing for text, coarse pixel statistics for images.

    Both sides land in the same TOY_DIM space so exported image embeddings
    stay dimension-compatible with served text embeddings.
    """

    def text_embed(self, text: str) -> list[float]:
        vec = [0.0] * TOY_DIM
        padded = f"  {text.lower()} "
        for i in range(len(padded) - 2):
            vec[_fnv1a(padded[i : i + 3]) % TOY_DIM] += 1.0
        return _unit(vec)

    def image_embed(self, path: str) -> list[float]:
        with Image.open(path) as img:
            small = img.convert("RGB").resize((4, 4))
            data = small.tobytes()
        pixels = [(data[i], data[i + 1], data[i + 2]) for i in range(0, len(data), 3)]
        vec = [0.0] * TOY_DIM
        for i, (r, g, b) in enumerate(pixels):
            vec[(2 * i) % TOY_DIM] += (r - g) / 255.0
            vec[(2 * i + 1) % TOY_DIM] += (g - b) / 255.0
            vec[(2 * i + 5) % TOY_DIM] += (r + g + b) / 765.0
        return _unit(vec)


class ToyPosTagger:
    """Suffix-and-stoplist heuristic: alphabetic content words count as nouns."""

    def _verbish(self, word: str) -> bool:
        # Length guard keeps short nouns like "bed" or "fly" untouched.
        return any(
            word.endswith(suffix) and len(word) > len(suffix) + 2
            for suffix in _VERBISH_SUFFIXES
        )

    def tag(self, tokens: list[str]) -> list[str]:
        tags = []
        for token in tokens:
            lower = token.lower()
            if not lower.isalpha() or len(lower) < 2:
                tags.append("other")
            elif lower in _FUNCTION_WORDS or self._verbish(lower):
                tags.append("other")
            else:
                tags.append("noun")
        return tags


def _unit(vec: list[float]) -> list[float]:
    norm = sum(x * x for x in vec) ** 0.5
    if norm == 0.0:
        return vec
    return [x / norm for x in vec]
