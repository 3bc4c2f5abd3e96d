"""Request validation and dispatch for the line protocol.

One JSON object per line.  Requests look like ``{"id": ..., "op": str,
"payload": {...}}`` and every input line gets exactly one response line:
``{"id": ..., "ok": true, "result": {...}}`` on success, otherwise
``{"id": ..., "ok": false, "error": str}`` with the request id echoed when
it could be recovered.  Nothing in here may raise on attacker-shaped
input; backend exceptions become error responses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

MAX_LINE_BYTES = 1_000_000
SUBWORD_MARKER = "##"
OPS = ("mask_fill", "text_embed", "image_embed", "pos_tag")


@dataclass
class ModelSet:
    """The three backends a serving process dispatches to."""

    masker: Any
    encoder: Any
    tagger: Any


def is_whole_word(word: str) -> bool:
    """True for single-word candidates a pipeline may insert verbatim."""
    if not word or SUBWORD_MARKER in word:
        return False
    return not any(ch.isspace() for ch in word)


def _error(request_id: Any, message: str) -> dict:
    return {"id": request_id, "ok": False, "error": message}


def _checked_id(request: dict) -> Any:
    """The echoable request id, or None when absent or unreasonable."""
    request_id = request.get("id")
    if isinstance(request_id, (int, str)) and not isinstance(request_id, bool):
        return request_id
    return None


def _token_list(value: Any) -> list[str] | None:
    if not isinstance(value, list) or not all(isinstance(t, str) for t in value):
        return None
    return value


def handle_request(request: Any, models: ModelSet) -> dict:
    """Validate one decoded request and produce the response object."""
    if not isinstance(request, dict):
        return _error(None, "request must be a JSON object")
    request_id = _checked_id(request)
    op = request.get("op")
    if op not in OPS:
        return _error(request_id, f"unknown op {op!r}")
    payload = request.get("payload")
    if not isinstance(payload, dict):
        return _error(request_id, "payload must be a JSON object")

    try:
        if op == "mask_fill":
            result = _mask_fill(payload, models)
        elif op == "text_embed":
            result = _text_embed(payload, models)
        elif op == "image_embed":
            result = _image_embed(payload, models)
        else:
            result = _pos_tag(payload, models)
    except _BadPayload as exc:
        return _error(request_id, str(exc))
    except Exception as exc:  # backend trouble must never kill the server
        return _error(request_id, f"{op} failed: {exc}")
    return {"id": request_id, "ok": True, "result": result}


class _BadPayload(ValueError):
    pass


def _mask_fill(payload: dict, models: ModelSet) -> dict:
    tokens = _token_list(payload.get("tokens"))
    if tokens is None:
        raise _BadPayload("mask_fill needs tokens: [str]")
    mask_index = payload.get("mask_index")
    if not isinstance(mask_index, int) or isinstance(mask_index, bool):
        raise _BadPayload("mask_fill needs an integer mask_index")
    if not 0 <= mask_index < len(tokens):
        raise _BadPayload(f"mask_index {mask_index} outside token range")
    k = payload.get("k")
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise _BadPayload("mask_fill needs an integer k >= 1")
    raw = models.masker.fill(tokens, mask_index, k)
    kept = [[word, float(prob)] for word, prob in raw if is_whole_word(word)]
    return {"candidates": kept[:k]}


def _text_embed(payload: dict, models: ModelSet) -> dict:
    text = payload.get("text")
    if not isinstance(text, str):
        raise _BadPayload("text_embed needs text: str")
    return {"vector": [float(x) for x in models.encoder.text_embed(text)]}


def _image_embed(payload: dict, models: ModelSet) -> dict:
    path = payload.get("path")
    if not isinstance(path, str) or not path:
        raise _BadPayload("image_embed needs path: str")
    return {"vector": [float(x) for x in models.encoder.image_embed(path)]}


def _pos_tag(payload: dict, models: ModelSet) -> dict:
    tokens = _token_list(payload.get("tokens"))
    if tokens is None:
        raise _BadPayload("pos_tag needs tokens: [str]")
    tags = models.tagger.tag(tokens)
    if len(tags) != len(tokens):
        raise _BadPayload("tagger returned misaligned tags")
    return {"tags": [str(t) for t in tags]}


def handle_line(raw: bytes, models: ModelSet) -> bytes | None:
    """Map one wire line to one response line; None for blank input."""
    if len(raw) > MAX_LINE_BYTES:
        response = _error(None, f"request line exceeds {MAX_LINE_BYTES} bytes")
        return _encode(response)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        return _encode(_error(None, "request line is not valid UTF-8"))
    if not text.strip():
        return None
    try:
        request = json.loads(text)
    except json.JSONDecodeError as exc:
        return _encode(_error(None, f"request is not valid JSON: {exc.msg}"))
    return _encode(handle_request(request, models))


def _encode(response: dict) -> bytes:
    return json.dumps(response, ensure_ascii=False).encode("utf-8") + b"\n"
