"""Adapter configuration and listen-mode parsing."""

from __future__ import annotations

from dataclasses import dataclass

# Model identifier meaning: the literal string "toy" selects the built-in
# deterministic backend; anything else is treated as a checkpoint name or
# path and loaded lazily on first use.
TOY = "toy"


def parse_listen(value: str) -> tuple[str, int | None]:
    """Split a listen spec into ("stdio", None) or ("tcp", port).

    Port 0 is allowed and means "pick a free port"; the server reports the
    bound address on stderr once listening.
    """
    if value == "stdio":
        return "stdio", None
    if value.startswith("tcp:"):
        port_text = value[len("tcp:"):]
        if not port_text.isdigit():
            raise ValueError(f"bad listen spec {value!r}: port must be a number")
        port = int(port_text)
        if port > 65535:
            raise ValueError(f"bad listen spec {value!r}: port out of range")
        return "tcp", port
    raise ValueError(f"bad listen spec {value!r}: expected stdio or tcp:<port>")


@dataclass(frozen=True)
class AdapterConfig:
    """Everything the serving process needs, mirrored by the CLI flags."""

    listen: str = "stdio"
    maskfill_model: str = TOY
    encoder_model: str = TOY
    tagger_model: str = TOY
    device: str = "cpu"
    batch_size: int = 8

    def __post_init__(self) -> None:
        parse_listen(self.listen)  # raises on a bad spec
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        for field_name in ("maskfill_model", "encoder_model", "tagger_model"):
            if not getattr(self, field_name):
                raise ValueError(f"{field_name} must not be empty")
